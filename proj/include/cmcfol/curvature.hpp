#pragma once

// Mean curvature of the perturbed hemisphere graph S+_phi = {(1+phi(u)) u}
// under the rescaled metric, evaluated as the level-set mean curvature of
// F = rho - s phibar - (s^2/2) phibar^2 at the graph point, with all metric
// data taken from the degree-4 series. Also the closed-form r-expansion
// through r^2 and the finite-difference derivative evaluators paired with
// the closed forms.

#include <memory>

#include "cmcfol/harmonics.hpp"
#include "cmcfol/metric.hpp"

namespace cmcfol {

using HemiPtr = std::shared_ptr<const Hemisphere>;

/// Degree-0 homogeneous extension of a basis function, with analytic first
/// and second partials: each degree-k aggregate Q_k contributes
/// Q_k(X)/|X|^k. Evaluation anywhere off the origin.
class HomogeneousExtension {
  public:
    explicit HomogeneousExtension(const SurfaceFunction& phi);

    void eval_all(const Vec& X, double& value, Vec& grad, Mat& hess) const;
    double value(const Vec& X) const;
    Vec gradient(const Vec& X) const;
    ScalarField as_field() const;

  private:
    struct Block {
        int k;
        CompiledSeries q;
        std::vector<CompiledSeries> dq;   // dim entries
        std::vector<CompiledSeries> ddq;  // dim*dim entries, symmetric
    };
    int dim_ = 0;
    std::vector<Block> blocks_;
};

struct CurvatureField {
    Eigen::VectorXd values;  // H at the quadrature nodes
    SurfaceFunction projected;
    double projection_residual = 0.0;
    double r = 0.0;
    double s = 0.0;
};

/// Largest allowed |s phi| so the graph stays embedded.
inline constexpr double kGraphDelta0 = 0.9;

/// H(r, tau, s*phi) at every quadrature node, projected into the basis.
/// The jet fixes tau. r may be negative inside difference stencils (the
/// series data is polynomial in r); geometric callers pass r >= 0.
CurvatureField mean_curvature(const HemiPtr& ctx, const BoundaryJet& jet, double r,
                              const SurfaceFunction& phi, double s);

/// Closed-form expansion n + r [h_ii t - (n+3) h_ij t x_i x_j] + r^2 [...],
/// remainder integral omitted.
SurfaceFunction h_expansion_r2(const HemiPtr& ctx, const BoundaryJet& jet, double r);
Eigen::VectorXd h_expansion_r2_values(const HemiPtr& ctx, const BoundaryJet& jet, double r);

/// d/ds H(r, tau, phi0 + s psi) by central differences with Richardson
/// extrapolation; at (r, phi0) = (0, 0) this is -(Delta + n) psi.
SurfaceFunction h_phi_linearized(const HemiPtr& ctx, const BoundaryJet& jet, double r,
                                 const SurfaceFunction& phi0, const SurfaceFunction& psi);

/// Mixed second derivative d^2/dr ds of H at (0, 0) in the direction psi,
/// by two-sided finite differences with Richardson extrapolation.
SurfaceFunction h_phi_r_mixed(const HemiPtr& ctx, const BoundaryJet& jet,
                              const SurfaceFunction& psi);

/// Diagnostic evaluator of the printed closed form for the mixed
/// derivative. One inner factor of the source formula is malformed ("dt");
/// it is read here as a factor of t. Comparison output only; the finite
/// difference defines ground truth.
Eigen::VectorXd h_phi_r_printed_values(const HemiPtr& ctx, const BoundaryJet& jet,
                                       const SurfaceFunction& psi);

/// Second derivative in the graph direction at r = 0:
/// 2 n psi^2 - (n-2) |grad phibar|^2 evaluated at the nodes.
SurfaceFunction h_phi_phi(const HemiPtr& ctx, const SurfaceFunction& psi);
Eigen::VectorXd h_phi_phi_values(const HemiPtr& ctx, const SurfaceFunction& psi);

/// d/dr H(r, tau, 0) at r = 0 by central differences with Richardson
/// extrapolation (the first-order term of the expansion).
SurfaceFunction h_r_derivative(const HemiPtr& ctx, const BoundaryJet& jet);

/// Ambient Laplacian of phibar^2 both as a single field and via
/// 2 phibar Lap phibar + 2 |grad phibar|_g^2; agreement is asserted by tests.
double laplacian_phibar_squared_single(const RescaledMetric& metric,
                                       const HomogeneousExtension& ext, const Vec& X);
double laplacian_phibar_squared_product(const RescaledMetric& metric,
                                        const HomogeneousExtension& ext, const Vec& X);

}  // namespace cmcfol
