#include "cmcfol/solver.hpp"

#include <cmath>
#include <limits>

namespace cmcfol {

namespace {

/// Coefficients of (H - n) from a projected curvature field.
Eigen::VectorXd residual_coeffs(const HemiPtr& ctx, const CurvatureField& field) {
    Eigen::VectorXd c = field.projected.coeffs;
    // the constant member is 1/sqrt(area), so n has coefficient n*sqrt(area)
    c[0] -= ctx->n() * std::sqrt(ctx->area());
    return c;
}

double sup_norm_of(const HemiPtr& ctx, const SurfaceFunction& f) {
    return ctx->values_at_nodes(f).cwiseAbs().maxCoeff();
}

}  // namespace

SurfaceFunction default_phi_init(const HemiPtr& ctx, const MetricModel& model, const Vec& tau) {
    const BoundaryJet jet = model.jet_at(tau);
    SurfaceFunction hr = h_r_derivative(ctx, jet);
    return ctx->solve_L(ctx->project_Kperp(-1.0 * hr));
}

SurfaceFunction solve_kperp(const HemiPtr& ctx, const MetricModel& model, double r,
                            const Vec& tau, const std::optional<SurfaceFunction>& phi_init,
                            const SolverOptions& opts, KperpDiagnostics* diag) {
    if (r < 0.0) throw DomainError("solve_kperp: r must be >= 0");
    const BoundaryJet jet = model.jet_at(tau);

    SurfaceFunction phi = phi_init ? ctx->project_Kperp(*phi_init)
                                   : default_phi_init(ctx, model, tau);

    if (r == 0.0) {
        // the limit equation L phi + H_r(0,tau,0) = 0 is linear; report its
        // residual rather than iterating
        SurfaceFunction hr = h_r_derivative(ctx, jet);
        phi = ctx->solve_L(ctx->project_Kperp(-1.0 * hr));
        SurfaceFunction limit_resid =
            ctx->project_Kperp(ctx->laplace_beltrami(phi) * -1.0 - double(ctx->n()) * phi - hr);
        if (diag) {
            diag->iters = 0;
            diag->kperp_residual = sup_norm_of(ctx, limit_resid);
            diag->kernel_residual = 0.0;
            diag->projection_residual = 0.0;
            diag->converged = true;
        }
        return phi;
    }

    int iters = 0;
    double kperp_res = std::numeric_limits<double>::infinity();
    double kernel_res = 0.0, proj_res = 0.0;
    bool converged = false;
    while (true) {
        CurvatureField field = mean_curvature(ctx, jet, r, phi, r);
        Eigen::VectorXd resid = residual_coeffs(ctx, field);
        SurfaceFunction rf = ctx->make_function(resid);
        SurfaceFunction perp = ctx->project_Kperp(rf);
        kperp_res = sup_norm_of(ctx, perp);
        kernel_res = ctx->project_K(rf).norm();
        proj_res = field.projection_residual;
        if (kperp_res <= opts.tol_perp) {
            converged = true;
            break;
        }
        if (iters >= opts.max_iters)
            throw ContinuationError(
                "solve_kperp: no convergence in " + std::to_string(opts.max_iters) +
                " iterations at r = " + std::to_string(r) + "; try a smaller r-step");
        SurfaceFunction delta = ctx->solve_L(perp * (1.0 / r));
        phi -= delta;
        for (int id : ctx->kernel_ids()) phi.coeffs[id] = 0.0;
        ++iters;
    }
    if (diag) {
        diag->iters = iters;
        diag->kperp_residual = kperp_res;
        diag->kernel_residual = kernel_res;
        diag->projection_residual = proj_res;
        diag->converged = converged;
    }
    return phi;
}

Vec reduced_map(const HemiPtr& ctx, const MetricModel& model, double r, const Vec& tau,
                SurfaceFunction* phi_io, const SolverOptions& opts) {
    if (r == 0.0) return (-ctx->moment_constant() * model.hmean_grad(tau)).eval();
    std::optional<SurfaceFunction> init;
    if (phi_io && phi_io->coeffs.size() == ctx->size()) init = *phi_io;
    SurfaceFunction phi = solve_kperp(ctx, model, r, tau, init, opts);
    if (phi_io) *phi_io = phi;
    const BoundaryJet jet = model.jet_at(tau);
    CurvatureField field = mean_curvature(ctx, jet, r, phi, r);
    SurfaceFunction resid = ctx->make_function(residual_coeffs(ctx, field));
    return (ctx->project_K(resid) / (r * r)).eval();
}

Vec solve_tau(const HemiPtr& ctx, const MetricModel& model, double r, const Vec& tau_init,
              SurfaceFunction* phi_io, const SolverOptions& opts, int* iters_out) {
    const int n = model.n;
    const double c_n = ctx->moment_constant();

    auto jacobian = [&](const Vec& tau) {
        Mat J = (-c_n * model.hmean_hess(tau)).eval();
        Eigen::FullPivLU<Mat> lu(J);
        if (!lu.isInvertible()) {
            Eigen::JacobiSVD<Mat> svd(J);
            const double cond = svd.singularValues()(0) /
                                std::max(svd.singularValues()(n - 1), 1e-300);
            throw NondegeneracyError(
                "solve_tau: mean-curvature Hessian is singular (condition number " +
                std::to_string(cond) + "); the model has no nondegenerate critical point");
        }
        return lu;
    };

    Vec tau = tau_init;
    jacobian(tau);  // reject degenerate models before any expensive work
    double first_norm = -1.0;
    for (int it = 0; it <= opts.tau_max_iters; ++it) {
        Vec F = reduced_map(ctx, model, r, tau, phi_io, opts);
        const double fn = F.norm();
        if (first_norm < 0.0) first_norm = fn;
        if (fn <= opts.tol_K) {
            if (iters_out) *iters_out = it;
            return tau;
        }
        if (!std::isfinite(fn) || fn > 1e3 * (first_norm + 1.0))
            throw ContinuationError("solve_tau: Newton iteration diverging at r = " +
                                    std::to_string(r));
        tau -= jacobian(tau).solve(F);
        if (tau.norm() > model.domain_radius)
            throw ContinuationError("solve_tau: tau left the model domain at r = " +
                                    std::to_string(r));
    }
    throw ContinuationError("solve_tau: no convergence in " +
                            std::to_string(opts.tau_max_iters) + " iterations at r = " +
                            std::to_string(r));
}

// ---------------------------------------------------------------------------
// Foliation assembly and verification.

Vec leaf_chart_point(const LeafSolution& leaf, const HemiPtr& ctx, const Vec& x) {
    const int n = ctx->n();
    const double x2 = x.squaredNorm();
    if (x2 >= 1.0) throw DomainError("leaf_chart_point: |x| must be < 1");
    const double t = std::sqrt(1.0 - x2);
    Vec u(n + 1);
    u.head(n) = x;
    u[n] = t;
    const double pv = ctx->eval(leaf.phi, u);
    const double w = leaf.r * (1.0 + leaf.r * pv);
    Vec out(n + 1);
    out.head(n) = leaf.tau + w * x;
    out[n] = w * t;
    return out;
}

namespace {

struct LeafEvaluator {
    const LeafSolution* leaf;
    const Hemisphere* ctx;
    HomogeneousExtension ext;

    LeafEvaluator(const LeafSolution& l, const HemiPtr& c) : leaf(&l), ctx(c.get()), ext(l.phi) {}

    // Upsilon(x) and its x-derivatives (columns dUdx[i])
    void eval(const Vec& x, Vec& ups, std::vector<Vec>* dUdx) const {
        const int n = ctx->n();
        const double x2 = x.squaredNorm();
        const double t = std::sqrt(1.0 - x2);
        Vec u(n + 1);
        u.head(n) = x;
        u[n] = t;
        double pv;
        Vec pg;
        Mat pH;
        ext.eval_all(u, pv, pg, pH);
        const double r = leaf->r;
        const double w = r * (1.0 + r * pv);
        ups.resize(n + 1);
        ups.head(n) = leaf->tau + w * x;
        ups[n] = w * t;
        if (!dUdx) return;
        dUdx->assign(n, Vec(n + 1));
        for (int i = 0; i < n; ++i) {
            // du/dx_i = (e_i, -x_i/t); dw/dx_i = r^2 * (grad phibar . du/dx_i)
            const double dphi = pg[i] - pg[n] * (x[i] / t);
            const double dw = r * r * dphi;
            Vec& col = (*dUdx)[i];
            col.head(n) = dw * x;
            col[i] += w;
            col[n] = dw * t + w * (-x[i] / t);
        }
    }
};

std::vector<Vec> det_sample_points(int n, int density) {
    // rings of directions, |x| <= 0.95, plus the center
    std::vector<Vec> pts;
    pts.push_back(Vec::Zero(n));
    const int nrad = std::max(2, density);
    const int ndir = std::max(4, 4 * density);
    for (int a = 1; a <= nrad; ++a) {
        const double rho = 0.95 * a / nrad;
        if (n == 2) {
            for (int b = 0; b < ndir; ++b) {
                const double ang = 2.0 * M_PI * b / ndir;
                Vec x(2);
                x << rho * std::cos(ang), rho * std::sin(ang);
                pts.push_back(x);
            }
        } else {
            QuadratureRule dirs = sphere_rule(n - 1, std::min(7, 2 * density + 1));
            for (int b = 0; b < dirs.point_count(); ++b)
                pts.push_back(rho * dirs.nodes.row(b).transpose());
        }
    }
    return pts;
}

double free_boundary_angle(const LeafSolution& leaf, const HemiPtr& ctx,
                           const RescaledMetric& metric) {
    const int n = ctx->n();
    HomogeneousExtension ext(leaf.phi);
    const int ndir = n == 2 ? 8 : 12;
    QuadratureRule dirs = sphere_rule(n - 1, 7);
    double worst = 0.0;

    auto surface_point = [&](const Vec& u) {
        const double pv = ctx->eval(leaf.phi, u);
        return ((1.0 + leaf.r * pv) * u).eval();
    };

    for (int b = 0; b < std::min(ndir, dirs.point_count()); ++b) {
        Vec omega = dirs.nodes.row(b).transpose();
        Vec u0(n + 1);
        u0.head(n) = omega;
        u0[n] = 0.0;

        // meridian tangent by a central difference along the polar parameter
        const double h = 1e-5;
        auto merid = [&](double sig) {
            Vec u(n + 1);
            u.head(n) = std::sqrt(1.0 - sig * sig) * omega;
            u[n] = sig;
            return surface_point(u);
        };
        Vec tb = (merid(h) - merid(-h)) / (2.0 * h);

        // equator tangents: directions of T_omega S^{n-1} lifted to the leaf
        std::vector<Vec> eq;
        for (int c = 0; c < n; ++c) {
            Vec d = Vec::Unit(n, c) - omega * omega[c];
            if (d.norm() < 1e-8) continue;
            d.normalize();
            auto curve = [&](double sig) {
                Vec w = (omega + sig * d).normalized();
                Vec u(n + 1);
                u.head(n) = w;
                u[n] = 0.0;
                return surface_point(u);
            };
            eq.push_back((curve(h) - curve(-h)) / (2.0 * h));
        }

        const Vec Xbar = surface_point(u0);
        const Mat G = metric.direct_at(Xbar);
        // Gram-Schmidt tb against the equator tangents in G
        Vec nu = tb;
        for (const Vec& e : eq) {
            const double ee = e.dot(G * e);
            if (ee > 0) nu -= (nu.dot(G * e) / ee) * e;
        }
        const double nn = std::sqrt(std::max(nu.dot(G * nu), 1e-300));
        nu /= nn;
        Vec T = Vec::Zero(n + 1);
        T[n] = 1.0;
        const double gtt = T.dot(G * T);
        T /= std::sqrt(gtt);
        if (nu.dot(G * T) > 0) nu = -nu;  // conormal points outside (downward)
        const double c = std::clamp(-nu.dot(G * T), -1.0, 1.0);
        worst = std::max(worst, std::acos(c));
    }
    return worst;
}

FoliationDiagnostics diagnostics_pass(const FoliationResult& result, int sample_density,
                                      bool require_central) {
    const auto& leaves = result.leaves;
    const HemiPtr& ctx = result.ctx;
    const int n = ctx->n();
    const int L = static_cast<int>(leaves.size());
    if (require_central && L < 3)
        throw InsufficientDataError("verify_foliation: need at least 3 leaves, have " +
                                    std::to_string(L));
    if (L < 2)
        throw InsufficientDataError("foliation diagnostics: need at least 2 leaves");
    for (const auto& l : leaves)
        if (!l.converged) throw ContinuationError("foliation diagnostics: unconverged leaf");

    FoliationDiagnostics out;
    out.det_min = std::numeric_limits<double>::infinity();

    std::vector<LeafEvaluator> evals;
    evals.reserve(L);
    for (const auto& l : leaves) evals.emplace_back(l, ctx);

    const auto samples = det_sample_points(n, sample_density);
    auto det_at = [&](int k_lo, int k_mid, int k_hi, const Vec& x) {
        Vec ups_lo, ups_hi, ups_mid;
        std::vector<Vec> dU;
        evals[k_lo].eval(x, ups_lo, nullptr);
        evals[k_hi].eval(x, ups_hi, nullptr);
        evals[k_mid].eval(x, ups_mid, &dU);
        const Vec dUdr = (ups_hi - ups_lo) / (leaves[k_hi].r - leaves[k_lo].r);
        Mat M(n + 1, n + 1);
        M.col(0) = dUdr;
        for (int i = 0; i < n; ++i) M.col(i + 1) = dU[i];
        return M.determinant();
    };

    if (L >= 3) {
        for (int k = 1; k + 1 < L; ++k)
            for (const Vec& x : samples) {
                out.det_min = std::min(out.det_min, det_at(k - 1, k, k + 1, x));
                ++out.det_samples;
            }
    } else {
        for (int k = 0; k < 2; ++k)
            for (const Vec& x : samples) {
                out.det_min = std::min(out.det_min, det_at(0, k, 1, x));
                ++out.det_samples;
            }
    }

    out.free_boundary_max_angle = 0.0;
    for (const auto& l : leaves) {
        RescaledMetric metric(result.model.jet_at(l.tau), l.r);
        out.free_boundary_max_angle =
            std::max(out.free_boundary_max_angle, free_boundary_angle(l, ctx, metric));
    }

    out.tau_max = 0.0;
    for (const auto& l : leaves) out.tau_max = std::max(out.tau_max, l.tau.norm());
    std::vector<double> lr, lt;
    for (const auto& l : leaves)
        if (l.tau.norm() > 1e-11) {
            lr.push_back(std::log(l.r));
            lt.push_back(std::log(l.tau.norm()));
        }
    if (lr.size() >= 2) {
        const double N = static_cast<double>(lr.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lr.size(); ++i) {
            sx += lr[i];
            sy += lt[i];
            sxx += lr[i] * lr[i];
            sxy += lr[i] * lt[i];
        }
        out.tau_slope_fit = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    } else {
        // tau vanishes to solver tolerance on the whole grid: the decay
        // bound holds vacuously
        out.tau_slope_fit = std::numeric_limits<double>::infinity();
    }
    out.valid = true;
    return out;
}

}  // namespace

FoliationResult build_foliation(const HemiPtr& ctx, const MetricModel& model,
                                const std::vector<double>& r_grid, const SolverOptions& opts) {
    if (r_grid.empty()) throw ConfigError("build_foliation: empty r grid");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (r_grid[i] <= 0.0) throw ConfigError("build_foliation: grid radii must be positive");
        if (i > 0 && r_grid[i] <= r_grid[i - 1])
            throw ConfigError("build_foliation: r grid must be strictly increasing");
    }
    if (r_grid.back() > 0.25)
        throw ConfigError("build_foliation: r beyond 0.25 leaves the perturbative regime");

    FoliationResult out;
    out.model = model;
    out.ctx = ctx;

    Vec tau = Vec::Zero(model.n);
    SurfaceFunction phi = default_phi_init(ctx, model, tau);

    for (double r : r_grid) {
        LeafSolution leaf;
        leaf.r = r;
        try {
            if (!opts.pin_tau) {
                tau = solve_tau(ctx, model, r, tau, &phi, opts);
            }
            KperpDiagnostics kd;
            phi = solve_kperp(ctx, model, r, tau, phi, opts, &kd);
            leaf.tau = tau;
            leaf.phi = phi;
            leaf.kperp_residual = kd.kperp_residual;
            leaf.kernel_residual = kd.kernel_residual;
            leaf.projection_residual = kd.projection_residual;
            leaf.newton_iters = kd.iters;
            leaf.converged = kd.converged && (opts.pin_tau || kd.kernel_residual <= opts.tol_K);
            out.leaves.push_back(std::move(leaf));
        } catch (const Error& e) {
            leaf.tau = tau;
            leaf.phi = ctx->zero_function();
            leaf.converged = false;
            out.leaves.push_back(std::move(leaf));
            out.aborted = true;
            out.abort_reason = e.what();
            break;
        }
        if (!out.leaves.back().converged) {
            out.aborted = true;
            out.abort_reason = "leaf failed to reach tolerance at r = " + std::to_string(r);
            break;
        }
    }

    if (!out.aborted) {
        int converged = 0;
        for (const auto& l : out.leaves) converged += l.converged ? 1 : 0;
        if (converged >= 2)
            out.diagnostics = diagnostics_pass(out, 4, /*require_central=*/false);
    }
    return out;
}

FoliationDiagnostics verify_foliation(const FoliationResult& result, int sample_density) {
    return diagnostics_pass(result, sample_density, /*require_central=*/true);
}

}  // namespace cmcfol
