#include "cmcfol/metric.hpp"

#include <cmath>

namespace cmcfol {

namespace detail {
bool corrupt_inverse_metric_for_test = false;
}

// ---------------------------------------------------------------------------
// Random jets.

namespace {

Rational small_rational(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-2, 2);
    std::uniform_int_distribution<int> den(1, 3);
    return Rational(num(rng)) / Rational(den(rng));
}

}  // namespace

BoundaryJetQ random_rational_jet(int n, std::mt19937_64& rng) {
    BoundaryJetQ jet(n);
    auto r = [&] { return small_rational(rng); };

    auto fill_sym2 = [&](auto&& set) {
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Rational v = r();
                set(i, j, v);
                set(j, i, v);
            }
    };
    fill_sym2([&](int i, int j, const Rational& v) { jet.H(i, j) = v; });
    fill_sym2([&](int i, int j, const Rational& v) { jet.RT(i, j) = v; });
    fill_sym2([&](int i, int j, const Rational& v) { jet.RTt(i, j) = v; });
    fill_sym2([&](int i, int j, const Rational& v) { jet.RTtt(i, j) = v; });

    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Rational v = r();
                jet.H1(i, j, k) = jet.H1(j, i, k) = v;
                v = r();
                jet.RTk(i, j, k) = jet.RTk(j, i, k) = v;
                v = r();
                jet.RTtk(i, j, k) = jet.RTtk(j, i, k) = v;
            }
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    Rational v = r();
                    jet.H2(i, j, k, l) = jet.H2(j, i, k, l) = v;
                    v = r();
                    jet.RTkl(i, j, k, l) = jet.RTkl(j, i, k, l) = v;
                    for (int m = 0; m < n; ++m) {
                        v = r();
                        jet.H3(i, j, k, l, m) = jet.H3(j, i, k, l, m) = v;
                    }
                }
    }

    // Curvature-symmetric tensors: antisymmetrize a raw draw in (i,k) and
    // (j,l), then symmetrize the pair exchange. Exact in rational arithmetic.
    const Rational quarter = Rational(1) / Rational(4);
    const Rational half = Rational(1) / Rational(2);
    auto fill_curv = [&](int extra, auto&& set) {
        const int total = extra == 0 ? 1 : (extra == 1 ? n : n * n);
        for (int d = 0; d < total; ++d) {
            const int d0 = d % n;
            const int d1 = (d / n) % n;
            std::vector<Rational> raw(n * n * n * n);
            for (auto& v : raw) v = small_rational(rng);
            auto at = [&](int i, int k, int j, int l) -> Rational& {
                return raw[((i * n + k) * n + j) * n + l];
            };
            std::vector<Rational> anti(n * n * n * n);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    for (int j = 0; j < n; ++j)
                        for (int l = 0; l < n; ++l)
                            anti[((i * n + k) * n + j) * n + l] =
                                quarter * (at(i, k, j, l) - at(k, i, j, l) - at(i, k, l, j) +
                                           at(k, i, l, j));
            auto anti_at = [&](int i, int k, int j, int l) -> const Rational& {
                return anti[((i * n + k) * n + j) * n + l];
            };
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    for (int j = 0; j < n; ++j)
                        for (int l = 0; l < n; ++l)
                            set(i, k, j, l, d0, d1,
                                half * (anti_at(i, k, j, l) + anti_at(j, l, i, k)));
        }
    };
    fill_curv(0, [&](int i, int k, int j, int l, int, int, const Rational& v) {
        jet.RB(i, k, j, l) = v;
    });
    fill_curv(1, [&](int i, int k, int j, int l, int m, int, const Rational& v) {
        jet.RBm(i, k, j, l, m) = v;
    });
    fill_curv(2, [&](int i, int k, int j, int l, int m, int p, const Rational& v) {
        jet.RBmp(i, k, j, l, m, p) = v;
    });

    validate_jet(jet);
    return jet;
}

// ---------------------------------------------------------------------------

SeriesMatrix<double> rescaled_inverse_metric(const BoundaryJet& jet, double r) {
    if (r < 0.0) throw DomainError("rescaled_inverse_metric: r must be >= 0");
    SeriesMatrix<double> g = inverse_metric_series(jet);
    SeriesMatrix<double> out(g.dim(), g.vars(), g.degree_bound());
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) out.entry(i, j) = g.entry(i, j).dilate(r);
    out.symmetric_hint(true);
    return out;
}

void require_in_half_ball(const Vec& X) {
    if (X.norm() >= 2.0) throw DomainError("point outside B2+: |X| >= 2");
    if (X[X.size() - 1] < -1e-12) throw DomainError("point outside B2+: t < 0");
}

RescaledMetric::RescaledMetric(const BoundaryJet& jet, double r) : dim_(jet.n + 1), r_(r) {
    SeriesMatrix<double> inv = inverse_metric_series(jet);
    SeriesMatrix<double> dir = matrix_series_invert(inv);
    inv_.resize(dim_ * dim_);
    dir_.resize(dim_ * dim_);
    dinv_.resize(dim_ * dim_ * dim_);
    ddir_.resize(dim_ * dim_ * dim_);
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) {
            SeriesD si = inv.entry(a, b).dilate(r);
            SeriesD sd = dir.entry(a, b).dilate(r);
            inv_[a * dim_ + b] = CompiledSeries(si);
            dir_[a * dim_ + b] = CompiledSeries(sd);
            for (int c = 0; c < dim_; ++c) {
                dinv_[(c * dim_ + a) * dim_ + b] = CompiledSeries(si.derive(c));
                ddir_[(c * dim_ + a) * dim_ + b] = CompiledSeries(sd.derive(c));
            }
        }
}

void RescaledMetric::fill_table(const Vec& X) const {
    // all compiled entries share vars = dim_ and degree bound 4
    const int stride = 5;
    pw_.assign(dim_ * stride, 1.0);
    for (int v = 0; v < dim_; ++v)
        for (int k = 1; k < stride; ++k) pw_[v * stride + k] = pw_[v * stride + k - 1] * X[v];
}

Mat RescaledMetric::inverse_at(const Vec& X) const {
    fill_table(X);
    Mat g(dim_, dim_);
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) g(a, b) = inv_[a * dim_ + b].eval_with_table(pw_.data());
    return g;
}

Mat RescaledMetric::direct_at(const Vec& X) const {
    fill_table(X);
    Mat g(dim_, dim_);
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) g(a, b) = dir_[a * dim_ + b].eval_with_table(pw_.data());
    return g;
}

void RescaledMetric::inverse_derivatives_at(const Vec& X, std::vector<Mat>& dinv) const {
    fill_table(X);
    dinv.assign(dim_, Mat(dim_, dim_));
    for (int c = 0; c < dim_; ++c)
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < dim_; ++b)
                dinv[c](a, b) = dinv_[(c * dim_ + a) * dim_ + b].eval_with_table(pw_.data());
}

void RescaledMetric::direct_derivatives_at(const Vec& X, std::vector<Mat>& ddir) const {
    fill_table(X);
    ddir.assign(dim_, Mat(dim_, dim_));
    for (int c = 0; c < dim_; ++c)
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < dim_; ++b)
                ddir[c](a, b) = ddir_[(c * dim_ + a) * dim_ + b].eval_with_table(pw_.data());
}

Vec RescaledMetric::log_sqrt_det_gradient_at(const Vec& X) const {
    Mat G = direct_at(X);
    std::vector<Mat> dG;
    direct_derivatives_at(X, dG);
    Mat Ginv = G.inverse();
    Vec out(dim_);
    for (int c = 0; c < dim_; ++c) out[c] = 0.5 * (Ginv * dG[c]).trace();
    return out;
}

double RescaledMetric::laplacian_at(const ScalarField& f, const Vec& X) const {
    require_in_half_ball(X);
    const Mat Ginv = inverse_at(X);
    std::vector<Mat> dGinv;
    inverse_derivatives_at(X, dGinv);
    const Vec ldg = log_sqrt_det_gradient_at(X);
    const Vec gf = f.gradient(X);
    const Mat Hf = f.hessian(X);
    double lap = 0.0;
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) {
            lap += Ginv(a, b) * Hf(a, b);
            lap += dGinv[a](a, b) * gf[b];
            lap += Ginv(a, b) * ldg[a] * gf[b];
        }
    return lap;
}

double ambient_laplacian(const BoundaryJet& jet, double r, const ScalarField& f, const Vec& X) {
    if (r < 0.0) throw DomainError("ambient_laplacian: r must be >= 0");
    RescaledMetric metric(jet, r);
    return metric.laplacian_at(f, X);
}

// ---------------------------------------------------------------------------
// Models.

MetricModel make_euclidean_model(int n) {
    if (n < 2) throw ConfigError("model dimension must be >= 2");
    MetricModel m;
    m.n = n;
    m.name = "euclidean";
    m.jet_at = [n](const Vec&) { return BoundaryJet(n); };
    m.hmean = [](const Vec&) { return 0.0; };
    m.hmean_grad = [n](const Vec&) { return Vec::Zero(n).eval(); };
    m.hmean_hess = [n](const Vec&) { return Mat::Zero(n, n).eval(); };
    return m;
}

MetricModel make_bump_model(int n, double a, const Mat& Q) {
    if (n < 2) throw ConfigError("model dimension must be >= 2");
    if (Q.rows() != n || Q.cols() != n) throw ValidationError("bump: Q must be n x n");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()))
        throw ValidationError("bump: Q must be symmetric");
    Eigen::FullPivLU<Mat> lu(Q);
    if (!lu.isInvertible())
        throw NondegeneracyError("bump: Q is singular; a nondegenerate critical point is required");

    MetricModel m;
    m.n = n;
    m.name = "bump";
    Mat Qc = Q;
    m.jet_at = [n, a, Qc](const Vec& tau) {
        BoundaryJet jet(n);
        const Vec g = Qc * tau;
        const double mean = a + 0.5 * tau.dot(g);
        for (int i = 0; i < n; ++i) {
            jet.H(i, i) = mean / n;
            for (int k = 0; k < n; ++k) {
                jet.H1(i, i, k) = g[k] / n;
                for (int l = 0; l < n; ++l) jet.H2(i, i, k, l) = Qc(k, l) / n;
            }
        }
        return jet;
    };
    m.hmean = [a, Qc](const Vec& tau) { return a + 0.5 * tau.dot(Qc * tau); };
    m.hmean_grad = [Qc](const Vec& tau) { return (Qc * tau).eval(); };
    m.hmean_hess = [Qc](const Vec&) { return Qc; };
    return m;
}

MetricModel make_table_model(const BoundaryJet& base, double domain_radius) {
    validate_jet(base, detail::default_jet_tol(base));
    const int n = base.n;
    if (n < 2) throw ConfigError("model dimension must be >= 2");

    MetricModel m;
    m.n = n;
    m.name = "table";
    m.domain_radius = domain_radius;
    BoundaryJet b = base;
    m.jet_at = [n, b](const Vec& tau) {
        BoundaryJet jet(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = b.H(i, j);
                for (int k = 0; k < n; ++k) {
                    v += b.H1(i, j, k) * tau[k];
                    double v1 = b.H1(i, j, k);
                    for (int l = 0; l < n; ++l) {
                        v += 0.5 * b.H2(i, j, k, l) * tau[k] * tau[l];
                        v1 += b.H2(i, j, k, l) * tau[l];
                        double v2 = b.H2(i, j, k, l);
                        for (int p = 0; p < n; ++p) {
                            v += b.H3(i, j, k, l, p) * tau[k] * tau[l] * tau[p] / 6.0;
                            v1 += 0.5 * b.H3(i, j, k, l, p) * tau[l] * tau[p];
                            v2 += b.H3(i, j, k, l, p) * tau[p];
                            jet.H3(i, j, k, l, p) = b.H3(i, j, k, l, p);
                        }
                        jet.H2(i, j, k, l) = v2;
                    }
                    jet.H1(i, j, k) = v1;
                }
                jet.H(i, j) = v;

                double rt = b.RT(i, j), rtt = b.RTt(i, j);
                for (int k = 0; k < n; ++k) {
                    rt += b.RTk(i, j, k) * tau[k];
                    rtt += b.RTtk(i, j, k) * tau[k];
                    double rk = b.RTk(i, j, k);
                    for (int l = 0; l < n; ++l) {
                        rt += 0.5 * b.RTkl(i, j, k, l) * tau[k] * tau[l];
                        rk += b.RTkl(i, j, k, l) * tau[l];
                        jet.RTkl(i, j, k, l) = b.RTkl(i, j, k, l);
                    }
                    jet.RTk(i, j, k) = rk;
                    jet.RTtk(i, j, k) = b.RTtk(i, j, k);
                }
                jet.RT(i, j) = rt;
                jet.RTt(i, j) = rtt;
                jet.RTtt(i, j) = b.RTtt(i, j);
            }
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l) {
                        double v = b.RB(i, k, j, l);
                        for (int mm = 0; mm < n; ++mm) {
                            v += b.RBm(i, k, j, l, mm) * tau[mm];
                            double v1 = b.RBm(i, k, j, l, mm);
                            for (int p = 0; p < n; ++p) {
                                v += 0.5 * b.RBmp(i, k, j, l, mm, p) * tau[mm] * tau[p];
                                v1 += b.RBmp(i, k, j, l, mm, p) * tau[p];
                                jet.RBmp(i, k, j, l, mm, p) = b.RBmp(i, k, j, l, mm, p);
                            }
                            jet.RBm(i, k, j, l, mm) = v1;
                        }
                        jet.RB(i, k, j, l) = v;
                    }
        return jet;
    };
    m.hmean = [m](const Vec& tau) {
        BoundaryJet j = m.jet_at(tau);
        double tr = 0.0;
        for (int i = 0; i < j.n; ++i) tr += j.H(i, i);
        return tr;
    };
    m.hmean_grad = [m, n](const Vec& tau) {
        BoundaryJet j = m.jet_at(tau);
        Vec g = Vec::Zero(n);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) g[k] += j.H1(i, i, k);
        return g;
    };
    m.hmean_hess = [m, n](const Vec& tau) {
        BoundaryJet j = m.jet_at(tau);
        Mat h = Mat::Zero(n, n);
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                for (int i = 0; i < n; ++i) h(k, l) += j.H2(i, i, k, l);
        return h;
    };
    return m;
}

void validate_model(const MetricModel& model, double tol, double fd_step, double fd_tol) {
    const int n = model.n;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.4 * model.domain_radius,
                                             0.4 * model.domain_radius);
    for (int trial = 0; trial < 4; ++trial) {
        Vec tau = Vec::Zero(n);
        if (trial > 0)
            for (int i = 0; i < n; ++i) tau[i] = u(rng);
        BoundaryJet jet = model.jet_at(tau);
        validate_jet(jet, detail::default_jet_tol(jet));

        double tr = 0.0;
        for (int i = 0; i < n; ++i) tr += jet.H(i, i);
        if (std::abs(tr - model.hmean(tau)) > tol * (1.0 + std::abs(tr)))
            throw ValidationError("model: hmean does not match trace of h");

        Vec g = model.hmean_grad(tau);
        for (int k = 0; k < n; ++k) {
            double trace_h1 = 0.0;
            for (int i = 0; i < n; ++i) trace_h1 += jet.H1(i, i, k);
            if (std::abs(trace_h1 - g[k]) > tol * (1.0 + std::abs(g[k])))
                throw ValidationError("model: hmean_grad does not match trace of h1");
        }

        for (int k = 0; k < n; ++k) {
            Vec tp = tau, tm = tau;
            tp[k] += fd_step;
            tm[k] -= fd_step;
            const double fd = (model.hmean(tp) - model.hmean(tm)) / (2.0 * fd_step);
            if (std::abs(fd - g[k]) > fd_tol * (1.0 + std::abs(g[k])))
                throw ValidationError("model: hmean_grad does not match central differences");
        }
    }
}

// explicit instantiations of the Lemma-1 builder
template SeriesMatrix<double> inverse_metric_series<double>(const BoundaryJetT<double>&);
template SeriesMatrix<Rational> inverse_metric_series<Rational>(const BoundaryJetT<Rational>&);

}  // namespace cmcfol
