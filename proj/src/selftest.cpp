#include "cmcfol/selftest.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace cmcfol {

namespace {

SeriesQ random_series(int vars, int D, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-3, 3);
    std::uniform_int_distribution<int> den(1, 3);
    SeriesQ s(vars, D);
    std::vector<MultiIndex> monos;
    MultiIndex e(vars, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == vars) {
            monos.push_back(e);
            return;
        }
        for (int d = 0; d <= left; ++d) {
            e[pos] = d;
            self(self, pos + 1, left - d);
        }
        e[pos] = 0;
    };
    rec(rec, 0, D);
    for (const auto& m : monos) s.add_term(m, Rational(num(rng)) / Rational(den(rng)));
    return s;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

}  // namespace

std::vector<SelfTestResult> run_selftest(const RunConfig& cfg) {
    std::vector<SelfTestResult> out;
    std::mt19937_64 rng(cfg.seed);
    auto push = [&](const std::string& name, bool pass, const std::string& detail) {
        out.push_back({name, pass, detail});
    };

    // --- series ring axioms (exact arithmetic)
    {
        bool ok = true;
        for (int trial = 0; trial < 6 && ok; ++trial) {
            const int vars = 2 + trial % 3, D = 3 + trial % 2;
            SeriesQ a = random_series(vars, D, rng), b = random_series(vars, D, rng),
                    c = random_series(vars, D, rng);
            ok = ok && ((a * b) * c == a * (b * c));
            ok = ok && (a * (b + c) == a * b + a * c);
            const Rational r(3, 2);
            ok = ok && ((a * b).dilate(r) == a.dilate(r) * b.dilate(r));
        }
        push("series_ring_axioms", ok, "associativity, distributivity, dilation homomorphism");
    }

    // --- evaluation against naive term sum, derivative against differences
    {
        bool ok = true;
        double worst = 0.0;
        std::uniform_real_distribution<double> up(-0.3, 0.3);
        for (int trial = 0; trial < 5; ++trial) {
            SeriesD s = random_series(3, 4, rng).to_double_series();
            std::vector<double> p{up(rng), up(rng), up(rng)};
            double naive = 0.0;
            for (const auto& [e, cc] : s.terms()) {
                double term = cc;
                for (int v = 0; v < 3; ++v) term *= std::pow(p[v], e[v]);
                naive += term;
            }
            const double got = s.eval(p);
            const double err = std::abs(got - naive) / (1.0 + std::abs(naive));
            worst = std::max(worst, err);
            ok = ok && err <= 1e-14;
        }
        push("series_eval_oracle", ok, "naive-sum agreement, worst rel err " + fmt(worst));
    }

    // --- Lemma 1: exact Neumann inversion and pinned umbilic coefficients
    {
        bool ok = true;
        std::string why = "ok";
        for (int trial = 0; trial < 6 && ok; ++trial) {
            const int n = 2 + trial % 2;
            BoundaryJetQ jet = random_rational_jet(n, rng);
            auto M = inverse_metric_series(jet);
            auto N = matrix_series_invert(M);
            auto P = M * N;
            auto I = SeriesMatrix<Rational>::identity(M.dim(), M.vars(), M.degree_bound());
            for (int i = 0; i < M.dim() && ok; ++i)
                for (int j = 0; j < M.dim() && ok; ++j)
                    if (!(P.entry(i, j) == I.entry(i, j))) {
                        ok = false;
                        why = "M * invert(M) != I exactly";
                    }
        }
        if (ok) {
            const Rational kappa(3, 2);
            auto M = inverse_metric_series(umbilic_jet(2, kappa));
            MultiIndex e(3, 0);
            auto tpow = [&](int p) {
                MultiIndex idx(3, 0);
                idx[2] = p;
                return idx;
            };
            const Rational c1 = M.entry(0, 0).coefficient(tpow(1));
            const Rational c2 = M.entry(0, 0).coefficient(tpow(2));
            const Rational c3 = M.entry(0, 0).coefficient(tpow(3));
            const Rational c4 = M.entry(0, 0).coefficient(tpow(4));
            if (!(c1 == Rational(2) * kappa && c2 == Rational(3) * kappa * kappa &&
                  c3 == Rational(4) * kappa * kappa * kappa &&
                  c4 == Rational(5) * kappa * kappa * kappa * kappa)) {
                ok = false;
                why = "umbilic t-power coefficients differ from 2k, 3k^2, 4k^3, 5k^4";
            }
        }
        push("lemma1_inverse_metric", ok, why);
    }

    // --- direct metric round trip
    {
        BoundaryJetQ jet = random_rational_jet(2, rng);
        auto inv = inverse_metric_series(jet);
        auto dir = direct_metric_series(jet);
        auto P = inv * dir;
        auto I = SeriesMatrix<Rational>::identity(inv.dim(), inv.vars(), inv.degree_bound());
        bool ok = true;
        for (int i = 0; i < inv.dim(); ++i)
            for (int j = 0; j < inv.dim(); ++j) ok = ok && (P.entry(i, j) == I.entry(i, j));
        push("direct_metric_roundtrip", ok, "inverse * direct = I through degree 4");
    }

    auto ctx = Hemisphere::build(cfg.n, cfg.L_max, cfg.quadrature_exactness);

    // --- quadrature moments
    {
        const auto& q = ctx->quad();
        const double area_err = std::abs(q.weights.sum() - hemisphere_area(cfg.n));
        double px = 0.0;  // | P~(x^{n+1}) |
        Eigen::VectorXd tvals(q.point_count());
        for (int j = 0; j < q.point_count(); ++j) tvals[j] = q.nodes(j, cfg.n);
        px = ctx->project_K_values(tvals).norm();
        const double cn_gap = std::abs(ctx->moment_m2() - (cfg.n + 4) * ctx->moment_m4());
        auto ctx2 = Hemisphere::build(cfg.n, cfg.L_max, cfg.quadrature_exactness + 4);
        const double cn_stab = std::abs(ctx->moment_constant() - ctx2->moment_constant());
        const bool ok = area_err <= 1e-11 && px <= 1e-12 && cn_gap <= 1e-12 && cn_stab <= 1e-10;
        push("quadrature_moments", ok,
             "area err " + fmt(area_err) + ", P~(t) " + fmt(px) + ", m2-(n+4)m4 " + fmt(cn_gap) +
                 ", c_n stability " + fmt(cn_stab));
    }

    // --- spectral relations: quadrature-assembled Laplacian vs eigenvalues
    {
        double worst = 0.0;
        // <grad Y_i, grad Y_j> = lambda_i delta_ij on the hemisphere for the
        // even basis; check via the homogeneous extension gradients
        for (int i = 0; i < ctx->size(); ++i) {
            SurfaceFunction yi = ctx->zero_function();
            yi.coeffs[i] = 1.0;
            HomogeneousExtension ext(yi);
            double dir = 0.0;
            for (int a = 0; a < ctx->quad().point_count(); ++a) {
                const Vec u = ctx->quad().nodes.row(a).transpose();
                dir += ctx->quad().weights[a] * ext.gradient(u).squaredNorm();
            }
            worst = std::max(worst, std::abs(dir - ctx->eigenvalue(i)));
        }
        push("basis_eigen_relations", worst <= 1e-9,
             "worst |<grad Y, grad Y> - k(k+n-1)| = " + fmt(worst));
    }

    // --- Neumann condition at the equator (one-sided t-derivative)
    {
        double worst = 0.0;
        QuadratureRule dirs = sphere_rule(cfg.n - 1, 9);
        for (int i = 0; i < ctx->size(); ++i) {
            SurfaceFunction yi = ctx->zero_function();
            yi.coeffs[i] = 1.0;
            for (int b = 0; b < dirs.point_count(); ++b) {
                Vec u0(cfg.n + 1);
                u0.head(cfg.n) = dirs.nodes.row(b).transpose();
                u0[cfg.n] = 0.0;
                const double h = 1e-6;
                Vec u1 = u0;
                u1.head(cfg.n) *= std::sqrt(1.0 - h * h);
                u1[cfg.n] = h;
                Vec u2 = u0;
                u2.head(cfg.n) *= std::sqrt(1.0 - 4 * h * h);
                u2[cfg.n] = 2 * h;
                const double f0 = ctx->eval(yi, u0), f1 = ctx->eval(yi, u1),
                             f2 = ctx->eval(yi, u2);
                worst = std::max(worst, std::abs((-3 * f0 + 4 * f1 - f2) / (2 * h)));
            }
        }
        push("basis_neumann_equator", worst <= 1e-8, "worst one-sided dt = " + fmt(worst));
    }

    // --- linearization: FD of H at (0,0) vs -(Delta+n) psi
    {
        std::normal_distribution<double> g(0.0, 1.0);
        double worst_rel = 0.0, worst_ker = 0.0;
        const BoundaryJet jet(cfg.n);
        for (int trial = 0; trial < 4; ++trial) {
            Eigen::VectorXd c(ctx->size());
            for (int i = 0; i < ctx->size(); ++i) c[i] = g(rng);
            SurfaceFunction psi = ctx->make_function(c / c.norm());
            SurfaceFunction fd =
                h_phi_linearized(ctx, jet, 0.0, ctx->zero_function(), psi);
            SurfaceFunction an =
                -1.0 * ctx->laplace_beltrami(psi) - double(cfg.n) * psi;
            const double rel = (fd.coeffs - an.coeffs).norm() / std::max(1.0, an.coeffs.norm());
            worst_rel = std::max(worst_rel, rel);
        }
        for (int id : ctx->kernel_ids()) {
            SurfaceFunction psi = ctx->zero_function();
            psi.coeffs[id] = 1.0;
            SurfaceFunction fd =
                h_phi_linearized(ctx, jet, 0.0, ctx->zero_function(), psi);
            worst_ker = std::max(worst_ker, fd.coeffs.cwiseAbs().maxCoeff());
        }
        push("linearization_fd_vs_spectral", worst_rel <= 1e-5 && worst_ker <= 1e-7,
             "rel " + fmt(worst_rel) + ", kernel abs " + fmt(worst_ker));
    }

    // --- second s-derivative vs the closed-form quadratic term
    {
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::VectorXd c(ctx->size());
        for (int i = 0; i < ctx->size(); ++i) c[i] = g(rng);
        SurfaceFunction psi = ctx->make_function(c / c.norm());
        const BoundaryJet jet(cfg.n);
        auto second = [&](double eps) {
            const Eigen::VectorXd hp = mean_curvature(ctx, jet, 0.0, psi, eps).values;
            const Eigen::VectorXd h0 = mean_curvature(ctx, jet, 0.0, psi, 0.0).values;
            const Eigen::VectorXd hm = mean_curvature(ctx, jet, 0.0, psi, -eps).values;
            return ((hp - 2.0 * h0 + hm) / (eps * eps)).eval();
        };
        const Eigen::VectorXd d1 = second(1e-3), d2 = second(5e-4);
        const Eigen::VectorXd fd = (4.0 * d2 - d1) / 3.0;
        const Eigen::VectorXd an = h_phi_phi_values(ctx, psi);
        const double rel =
            (fd - an).cwiseAbs().maxCoeff() / std::max(1.0, an.cwiseAbs().maxCoeff());
        push("h_phi_phi_fd_vs_closed_form", rel <= 1e-5, "rel " + fmt(rel));
    }

    // --- expansion consistency: |H(r) - H2(r)| = O(r^3)
    {
        BoundaryJet jet = random_jet(cfg.n, rng);
        std::vector<double> rs{0.2, 0.1, 0.05, 0.025}, errs;
        SurfaceFunction zero = ctx->zero_function();
        for (double r : rs) {
            const Eigen::VectorXd full = mean_curvature(ctx, jet, r, zero, 0.0).values;
            const Eigen::VectorXd expa = h_expansion_r2_values(ctx, jet, r);
            errs.push_back((full - expa).cwiseAbs().maxCoeff());
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const double X = std::log(rs[i]), Y = std::log(std::max(errs[i], 1e-300));
            sx += X;
            sy += Y;
            sxx += X * X;
            sxy += X * Y;
        }
        const double N = rs.size();
        const double slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
        push("expansion_order_r3", slope >= 2.7, "fitted slope " + fmt(slope));
    }

    // --- Neumann problem of the reduced construction (first-order term RHS)
    {
        BoundaryJet jet(cfg.n);
        for (int i = 0; i < cfg.n; ++i) jet.H(i, i) = 1.0;  // h = delta
        Eigen::VectorXd rhs_vals(ctx->quad().point_count());
        for (int a = 0; a < ctx->quad().point_count(); ++a) {
            const double t = ctx->quad().nodes(a, cfg.n);
            double xx = 0.0;
            for (int i = 0; i < cfg.n; ++i) xx += ctx->quad().nodes(a, i) * ctx->quad().nodes(a, i);
            rhs_vals[a] = cfg.n * t - (cfg.n + 3.0) * xx * t;
        }
        SurfaceFunction rhs = ctx->project_values(rhs_vals);
        SurfaceFunction phi = ctx->solve_L(rhs);
        SurfaceFunction op = -1.0 * ctx->laplace_beltrami(phi) - double(cfg.n) * phi;
        const double resid = (op.coeffs - ctx->project_Kperp(rhs).coeffs).norm();
        const double pk_mixed = ctx->project_K(h_phi_r_mixed(ctx, jet, phi)).norm();
        const double pk_quad = ctx->project_K(h_phi_phi(ctx, phi)).norm();
        push("neumann_problem_projections", resid <= 1e-10 && pk_mixed <= 1e-6 && pk_quad <= 1e-6,
             "op resid " + fmt(resid) + ", P~(H_phir phi) " + fmt(pk_mixed) + ", P~(H_phiphi) " +
                 fmt(pk_quad));
    }

    return out;
}

}  // namespace cmcfol
