#pragma once

// Fourth-order inverse-metric polynomial in Fermi coordinates built from a
// boundary jet, the direct metric reconstructed by truncated Neumann
// inversion, the dilation-rescaled metric on the half-ball B2+, and the
// ambient Laplacian of scalar fields under that metric.

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "cmcfol/jets.hpp"
#include "cmcfol/series.hpp"

namespace cmcfol {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace detail {
// Test hook: when set, the builder perturbs one Lemma-1 coefficient so the
// self-test's exact-inversion check must fail. Never set outside tests.
extern bool corrupt_inverse_metric_for_test;
}  // namespace detail

/// Inverse-metric polynomial through total degree 4: (n+1)x(n+1) with
/// g^{tt} = 1, g^{ti} = 0 and the full boundary-jet expansion in the ij
/// block. Sym_{ab} is the average over the named pair; the assembled ij
/// block is symmetrized, which only matters for the cubic-in-h t^3 x_k
/// coefficient (see the module docs).
template <class Coeff>
SeriesMatrix<Coeff> inverse_metric_series(const BoundaryJetT<Coeff>& jet);

/// Degree-4 Neumann inverse of the Lemma-1 polynomial; the direct metric is
/// never transcribed from elsewhere.
template <class Coeff>
SeriesMatrix<Coeff> direct_metric_series(const BoundaryJetT<Coeff>& jet) {
    return matrix_series_invert(inverse_metric_series(jet));
}

/// g^{ij}(r x, r t) as a polynomial on B2+; identity at r = 0.
SeriesMatrix<double> rescaled_inverse_metric(const BoundaryJet& jet, double r);

// ---------------------------------------------------------------------------
// Pointwise metric data on B2+ at fixed (jet, r).

/// Scalar field given with analytic first and second partials.
struct ScalarField {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
};

/// Precompiled rescaled metric: inverse and direct entries plus their first
/// derivative series. The dilation parameter may be negative internally
/// (used by two-sided finite differences in r); the public CLI/solver
/// surfaces only pass r >= 0.
class RescaledMetric {
  public:
    RescaledMetric(const BoundaryJet& jet, double r);

    int dim() const { return dim_; }
    double r() const { return r_; }

    /// Inverse metric g^{ab} at X (series value).
    Mat inverse_at(const Vec& X) const;
    /// Direct metric g_{ab} at X (series value).
    Mat direct_at(const Vec& X) const;
    /// dinv[c](a,b) = partial_c g^{ab} at X.
    void inverse_derivatives_at(const Vec& X, std::vector<Mat>& dinv) const;
    /// ddir[c](a,b) = partial_c g_{ab} at X.
    void direct_derivatives_at(const Vec& X, std::vector<Mat>& ddir) const;

    /// grad_c log sqrt(det g) = (1/2) tr(g^{-1} partial_c g), with g^{-1}
    /// the numeric inverse of the evaluated direct metric.
    Vec log_sqrt_det_gradient_at(const Vec& X) const;

    /// Laplace-Beltrami of f at X:
    /// g^{ab} f_ab + (partial_a g^{ab}) f_b + g^{ab} (partial_a logsqrtdet) f_b.
    double laplacian_at(const ScalarField& f, const Vec& X) const;

  private:
    int dim_;
    double r_;
    std::vector<CompiledSeries> inv_;        // dim*dim
    std::vector<CompiledSeries> dinv_;       // dim*dim*dim, [c][a][b]
    std::vector<CompiledSeries> dir_;        // dim*dim
    std::vector<CompiledSeries> ddir_;       // dim*dim*dim
    mutable std::vector<double> pw_;         // scratch power table
    void fill_table(const Vec& X) const;
};

/// Checks X in the closed half-ball B2+ (|X| < 2, t >= 0).
void require_in_half_ball(const Vec& X);

/// One-off evaluation API matching the module contract; builds the
/// rescaled metric and evaluates the Laplacian at the query point.
double ambient_laplacian(const BoundaryJet& jet, double r, const ScalarField& f, const Vec& X);

// ---------------------------------------------------------------------------
// Smooth field of jets along the boundary plus the boundary mean curvature.

struct MetricModel {
    int n = 0;
    std::function<BoundaryJet(const Vec& tau)> jet_at;
    std::function<double(const Vec& tau)> hmean;
    std::function<Vec(const Vec& tau)> hmean_grad;
    std::function<Mat(const Vec& tau)> hmean_hess;
    double domain_radius = 0.5;
    std::string name;
};

MetricModel make_euclidean_model(int n);

/// h_ij(tau) = ((a + tau'Q tau/2)/n) delta_ij with exact tau-derivatives in
/// h1/h2; Q must be symmetric nonsingular.
MetricModel make_bump_model(int n, double a, const Mat& Q);

/// Taylor-jet field: base tensors at tau = 0, extended by the derivative
/// slots (h from h1,h2,h3; Rtt from Rtt_k, Rtt_kl; Rb from Rb_m, Rb_mp; the
/// t-derivative slots from their k-slots). hmean and its derivatives are the
/// traces, so the gradient/Hessian consistency invariants hold by
/// construction; validate_model checks them numerically anyway.
MetricModel make_table_model(const BoundaryJet& base, double domain_radius);

/// Consistency checks from the model contract: trace identity, gradient vs
/// trace of h1, gradient vs central differences of hmean.
void validate_model(const MetricModel& model, double tol = 1e-12, double fd_step = 1e-5,
                    double fd_tol = 1e-6);

}  // namespace cmcfol

#include "cmcfol/metric_series_impl.hpp"
