#include "cmcfol/curvature.hpp"

#include <cmath>

namespace cmcfol {

// ---------------------------------------------------------------------------
// Homogeneous extension.

HomogeneousExtension::HomogeneousExtension(const SurfaceFunction& phi) {
    const Hemisphere& ctx = *phi.ctx;
    dim_ = ctx.n() + 1;
    // aggregate members by degree, then differentiate the aggregates
    std::map<int, SeriesD> by_degree;
    for (int i = 0; i < ctx.size(); ++i) {
        const double c = phi.coeffs[i];
        if (c == 0.0) continue;
        const auto& mem = ctx.members()[i];
        auto it = by_degree.find(mem.degree);
        if (it == by_degree.end())
            by_degree.emplace(mem.degree, mem.poly * c);
        else
            it->second += mem.poly * c;
    }
    for (auto& [k, q] : by_degree) {
        if (q.is_zero()) continue;
        Block b;
        b.k = k;
        b.q = CompiledSeries(q);
        b.dq.reserve(dim_);
        std::vector<SeriesD> first;
        for (int v = 0; v < dim_; ++v) {
            first.push_back(q.derive(v));
            b.dq.emplace_back(first.back());
        }
        b.ddq.reserve(dim_ * dim_);
        for (int v = 0; v < dim_; ++v)
            for (int w = 0; w < dim_; ++w) b.ddq.emplace_back(first[v].derive(w));
        blocks_.push_back(std::move(b));
    }
}

void HomogeneousExtension::eval_all(const Vec& X, double& value, Vec& grad, Mat& hess) const {
    const double u = X.squaredNorm();
    if (u == 0.0) throw DomainError("homogeneous extension: evaluation at the origin");
    value = 0.0;
    grad = Vec::Zero(dim_);
    hess = Mat::Zero(dim_, dim_);
    std::vector<double> pw;
    Vec gq(dim_);
    for (const auto& b : blocks_) {
        b.q.make_power_table(X, pw);
        const double q = b.q.eval_with_table(pw.data());
        for (int v = 0; v < dim_; ++v) gq[v] = b.dq[v].eval_with_table(pw.data());
        const double k = b.k;
        const double uk = std::pow(u, -0.5 * k);        // |X|^{-k}
        const double uk1 = uk / u;                      // |X|^{-k-2}
        const double uk2 = uk1 / u;                     // |X|^{-k-4}
        value += q * uk;
        grad += gq * uk - (k * q * uk1) * X;
        for (int v = 0; v < dim_; ++v)
            for (int w = v; w < dim_; ++w) {
                double hq = b.ddq[v * dim_ + w].eval_with_table(pw.data());
                double hvw = hq * uk - k * uk1 * (gq[v] * X[w] + gq[w] * X[v]) -
                             k * q * uk1 * (v == w ? 1.0 : 0.0) +
                             k * (k + 2.0) * q * uk2 * X[v] * X[w];
                hess(v, w) += hvw;
                if (w != v) hess(w, v) += hvw;
            }
    }
}

double HomogeneousExtension::value(const Vec& X) const {
    double v;
    Vec g;
    Mat h;
    eval_all(X, v, g, h);
    return v;
}

Vec HomogeneousExtension::gradient(const Vec& X) const {
    double v;
    Vec g;
    Mat h;
    eval_all(X, v, g, h);
    return g;
}

ScalarField HomogeneousExtension::as_field() const {
    ScalarField f;
    f.value = [this](const Vec& X) { return value(X); };
    f.gradient = [this](const Vec& X) { return gradient(X); };
    f.hessian = [this](const Vec& X) {
        double v;
        Vec g;
        Mat h;
        eval_all(X, v, g, h);
        return h;
    };
    return f;
}

// ---------------------------------------------------------------------------
// Mean curvature.

namespace {

double metric_laplacian(const Mat& Ginv, const std::vector<Mat>& dGinv, const Vec& ldg,
                        const Vec& grad, const Mat& hess) {
    double acc = Ginv.cwiseProduct(hess).sum();
    const int dim = static_cast<int>(Ginv.rows());
    for (int a = 0; a < dim; ++a) acc += dGinv[a].row(a).dot(grad);
    acc += ldg.dot(Ginv * grad);
    return acc;
}

}  // namespace

CurvatureField mean_curvature(const HemiPtr& ctx, const BoundaryJet& jet, double r,
                              const SurfaceFunction& phi, double s) {
    if (!std::isfinite(r) || !std::isfinite(s))
        throw DomainError("mean_curvature: r and s must be finite");
    const int dim = ctx->n() + 1;
    const auto& quad = ctx->quad();
    const int N = quad.point_count();

    RescaledMetric metric(jet, r);
    HomogeneousExtension ext(phi);
    const Eigen::VectorXd phi_nodes = ctx->values_at_nodes(phi);

    if (s != 0.0) {
        const double worst = phi_nodes.cwiseAbs().maxCoeff() * std::abs(s);
        if (worst > kGraphDelta0)
            throw DomainError("mean_curvature: |s phi| = " + std::to_string(worst) +
                              " exceeds the embedding bound");
    }

    CurvatureField out;
    out.values.resize(N);
    out.r = r;
    out.s = s;

    Vec X(dim), pg(dim), FG(dim), dPsi2(dim), gradPsi(dim), v(dim), ldg(dim);
    Mat pH(dim, dim), FH(dim, dim);
    std::vector<Mat> dGinv;
    for (int j = 0; j < N; ++j) {
        const Vec u = quad.nodes.row(j).transpose();
        const double pu = phi_nodes[j];
        const double w = 1.0 + s * pu;
        X = w * u;

        double pv;
        ext.eval_all(X, pv, pg, pH);

        const double spf = s * (1.0 + s * pv);
        FG = X - spf * pg;
        FH = Mat::Identity(dim, dim) - spf * pH - (s * s) * (pg * pg.transpose());

        const Mat Ginv = metric.inverse_at(X);
        metric.inverse_derivatives_at(X, dGinv);
        ldg = metric.log_sqrt_det_gradient_at(X);

        v = Ginv * FG;
        const double Psi2 = FG.dot(v);
        if (!(Psi2 > 1e-12))
            throw GeometryError("mean_curvature: degenerate graph normal (Psi^2 <= 0)");
        const double Psi = std::sqrt(Psi2);

        const double lap_rho = metric_laplacian(Ginv, dGinv, ldg, X, Mat::Identity(dim, dim));
        double N1 = lap_rho;
        if (s != 0.0) {
            const double lap_phi = metric_laplacian(Ginv, dGinv, ldg, pg, pH);
            const Vec g2 = 2.0 * pv * pg;
            const Mat h2 = 2.0 * (pg * pg.transpose() + pv * pH);
            const double lap_phi2 = metric_laplacian(Ginv, dGinv, ldg, g2, h2);
            N1 -= s * lap_phi + 0.5 * s * s * lap_phi2;
        }

        for (int c = 0; c < dim; ++c) dPsi2[c] = FG.dot(dGinv[c] * FG);
        dPsi2 += 2.0 * (FH * v);
        gradPsi = dPsi2 / (2.0 * Psi);
        const double inner = gradPsi.dot(v);

        out.values[j] = N1 / Psi - inner / Psi2;
        if (!std::isfinite(out.values[j]))
            throw NumericalError("mean_curvature: non-finite node value");
    }
    out.projected = ctx->project_values(out.values, &out.projection_residual);
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form expansion through r^2.

Eigen::VectorXd h_expansion_r2_values(const HemiPtr& ctx, const BoundaryJet& jet, double r) {
    const int n = ctx->n();
    validate_jet(jet, detail::default_jet_tol(jet));
    const auto& quad = ctx->quad();
    const int N = quad.point_count();
    Eigen::VectorXd out(N);

    double trh = 0.0, h_frob2 = 0.0;
    for (int i = 0; i < n; ++i) {
        trh += jet.H(i, i);
        for (int j = 0; j < n; ++j) h_frob2 += jet.H(i, j) * jet.H(i, j);
    }

    for (int a = 0; a < N; ++a) {
        const double t = quad.nodes(a, n);
        double hxx = 0.0, h2xx = 0.0, rxx = 0.0, rbxx = 0.0, h1xxx = 0.0, divx = 0.0;
        for (int i = 0; i < n; ++i) {
            const double xi = quad.nodes(a, i);
            double div_i = 0.0;
            for (int j = 0; j < n; ++j) {
                const double xj = quad.nodes(a, j);
                hxx += jet.H(i, j) * xi * xj;
                rxx += jet.RT(i, j) * xi * xj;
                double h2ij = 0.0, rbij = 0.0;
                for (int k = 0; k < n; ++k) {
                    h2ij += jet.H(i, k) * jet.H(k, j);
                    rbij += jet.RB(k, i, k, j);
                    h1xxx += jet.H1(i, j, k) * xi * xj * quad.nodes(a, k);
                }
                h2xx += h2ij * xi * xj;
                rbxx += rbij * xi * xj;
                div_i += jet.H1(j, i, j);
            }
            divx += div_i * xi;
        }
        const double v1 = trh * t - (n + 3.0) * hxx * t;
        const double v2 = 0.5 * (3.0 * n + 2.0) * hxx * hxx * t * t - (n + 4.0) * h1xxx * t +
                          (-0.5 * (n + 4.0) * rxx - 0.5 * (3.0 * n + 20.0) * h2xx - trh * hxx) *
                              t * t +
                          rbxx / 3.0 + 2.0 * divx * t + 2.0 * h_frob2 * t * t;
        out[a] = n + r * v1 + r * r * v2;
    }
    return out;
}

SurfaceFunction h_expansion_r2(const HemiPtr& ctx, const BoundaryJet& jet, double r) {
    return ctx->project_values(h_expansion_r2_values(ctx, jet, r));
}

// ---------------------------------------------------------------------------
// Finite-difference derivative evaluators. Step schedule per the module
// contract: eps in {1e-4, 5e-5}, r-steps {1e-3, 5e-4}, one Richardson pass.

namespace {

Eigen::VectorXd require_finite(Eigen::VectorXd v, const char* who) {
    if (!v.allFinite()) throw NumericalError(std::string(who) + ": non-finite difference values");
    return v;
}

}  // namespace

SurfaceFunction h_phi_linearized(const HemiPtr& ctx, const BoundaryJet& jet, double r,
                                 const SurfaceFunction& phi0, const SurfaceFunction& psi) {
    auto diff = [&](double eps) {
        SurfaceFunction up = phi0 + eps * psi;
        SurfaceFunction dn = phi0 - eps * psi;
        const Eigen::VectorXd hp = mean_curvature(ctx, jet, r, up, 1.0).values;
        const Eigen::VectorXd hm = mean_curvature(ctx, jet, r, dn, 1.0).values;
        return ((hp - hm) / (2.0 * eps)).eval();
    };
    const double e1 = 1e-4, e2 = 5e-5;
    const Eigen::VectorXd d1 = diff(e1), d2 = diff(e2);
    const Eigen::VectorXd rich = require_finite((4.0 * d2 - d1) / 3.0, "h_phi_linearized");
    return ctx->project_values(rich);
}

SurfaceFunction h_phi_r_mixed(const HemiPtr& ctx, const BoundaryJet& jet,
                              const SurfaceFunction& psi) {
    auto diff = [&](double hr, double eps) {
        const Eigen::VectorXd hpp = mean_curvature(ctx, jet, hr, psi, eps).values;
        const Eigen::VectorXd hpm = mean_curvature(ctx, jet, hr, psi, -eps).values;
        const Eigen::VectorXd hmp = mean_curvature(ctx, jet, -hr, psi, eps).values;
        const Eigen::VectorXd hmm = mean_curvature(ctx, jet, -hr, psi, -eps).values;
        return ((hpp - hpm - hmp + hmm) / (4.0 * hr * eps)).eval();
    };
    const Eigen::VectorXd d1 = diff(1e-3, 1e-4), d2 = diff(5e-4, 5e-5);
    const Eigen::VectorXd rich = require_finite((4.0 * d2 - d1) / 3.0, "h_phi_r_mixed");
    return ctx->project_values(rich);
}

Eigen::VectorXd h_phi_r_printed_values(const HemiPtr& ctx, const BoundaryJet& jet,
                                       const SurfaceFunction& psi) {
    const int n = ctx->n();
    const int dim = n + 1;
    const auto& quad = ctx->quad();
    const int N = quad.point_count();
    HomogeneousExtension ext(psi);
    const Eigen::VectorXd psi_nodes = ctx->values_at_nodes(psi);
    const Eigen::VectorXd lap_psi = ctx->values_at_nodes(ctx->laplace_beltrami(psi));

    Eigen::VectorXd out(N);
    Vec pg(dim);
    Mat pH(dim, dim);
    for (int a = 0; a < N; ++a) {
        const Vec u = quad.nodes.row(a).transpose();
        double pv;
        ext.eval_all(u, pv, pg, pH);
        const double t = u[n];
        double hxx = 0.0, term1 = 0.0, term2 = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                hxx += jet.H(i, j) * u[i] * u[j];
                term1 += pg[i] * jet.H(i, j) * u[j];
                term2 += pH(i, j) * jet.H(i, j);
            }
        double trh = 0.0;
        for (int i = 0; i < n; ++i) trh += jet.H(i, i);
        out[a] = 2.0 * term1 * (t * t * t + t * t + n * t) - 2.0 * term2 * t +
                 pg[n] * (trh + t * hxx) + (lap_psi[a] + 3.0 * psi_nodes[a]) * hxx * t -
                 psi_nodes[a] * hxx * t * t;
    }
    return out;
}

Eigen::VectorXd h_phi_phi_values(const HemiPtr& ctx, const SurfaceFunction& psi) {
    const int n = ctx->n();
    const auto& quad = ctx->quad();
    const int N = quad.point_count();
    HomogeneousExtension ext(psi);
    Eigen::VectorXd out(N);
    Vec pg(n + 1);
    Mat pH(n + 1, n + 1);
    for (int a = 0; a < N; ++a) {
        double pv;
        ext.eval_all(quad.nodes.row(a).transpose(), pv, pg, pH);
        out[a] = 2.0 * n * pv * pv - (n - 2.0) * pg.squaredNorm();
    }
    return out;
}

SurfaceFunction h_phi_phi(const HemiPtr& ctx, const SurfaceFunction& psi) {
    return ctx->project_values(h_phi_phi_values(ctx, psi));
}

SurfaceFunction h_r_derivative(const HemiPtr& ctx, const BoundaryJet& jet) {
    SurfaceFunction zero = ctx->zero_function();
    auto diff = [&](double hr) {
        const Eigen::VectorXd hp = mean_curvature(ctx, jet, hr, zero, 0.0).values;
        const Eigen::VectorXd hm = mean_curvature(ctx, jet, -hr, zero, 0.0).values;
        return ((hp - hm) / (2.0 * hr)).eval();
    };
    const Eigen::VectorXd d1 = diff(1e-3), d2 = diff(5e-4);
    const Eigen::VectorXd rich = require_finite((4.0 * d2 - d1) / 3.0, "h_r_derivative");
    return ctx->project_values(rich);
}

// ---------------------------------------------------------------------------
// The two routes to Lap(phibar^2).

double laplacian_phibar_squared_single(const RescaledMetric& metric,
                                       const HomogeneousExtension& ext, const Vec& X) {
    double pv;
    Vec pg;
    Mat pH;
    ext.eval_all(X, pv, pg, pH);
    ScalarField f;
    f.value = [&](const Vec&) { return pv * pv; };
    f.gradient = [&](const Vec&) { return (2.0 * pv * pg).eval(); };
    f.hessian = [&](const Vec&) { return (2.0 * (pg * pg.transpose() + pv * pH)).eval(); };
    return metric.laplacian_at(f, X);
}

double laplacian_phibar_squared_product(const RescaledMetric& metric,
                                        const HomogeneousExtension& ext, const Vec& X) {
    double pv;
    Vec pg;
    Mat pH;
    ext.eval_all(X, pv, pg, pH);
    ScalarField f;
    f.value = [&](const Vec&) { return pv; };
    f.gradient = [&](const Vec&) { return pg; };
    f.hessian = [&](const Vec&) { return pH; };
    const double lap_phi = metric.laplacian_at(f, X);
    const Mat Ginv = metric.inverse_at(X);
    return 2.0 * pv * lap_phi + 2.0 * pg.dot(Ginv * pg);
}

}  // namespace cmcfol
