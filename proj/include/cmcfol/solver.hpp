#pragma once

// Lyapunov-Schmidt reduction: solve P-perp(H(r,tau,r phi) - n) = 0 for
// phi in K-perp by quasi-Newton with the frozen model operator L, root-find
// the reduced kernel equation over tau with the analytic Jacobian
// -c_n Hess(hmean), continue over an increasing r-grid, and verify that the
// solved family is a foliation (transversality determinant, free-boundary
// angle, tau decay).

#include <optional>
#include <vector>

#include "cmcfol/curvature.hpp"

namespace cmcfol {

struct SolverOptions {
    double tol_perp = 1e-8;   // sup-norm of P-perp(H - n)
    double tol_K = 1e-7;      // norm of the reduced map
    int max_iters = 40;       // K-perp quasi-Newton cap
    int tau_max_iters = 30;   // tau-Newton cap
    bool pin_tau = false;     // keep tau = 0 (degenerate models, diagnostics)
};

struct LeafSolution {
    double r = 0.0;
    Vec tau;
    SurfaceFunction phi;             // kernel coefficients structurally zero
    double kperp_residual = 0.0;     // sup-norm of P-perp(H(r,tau,r phi) - n)
    double kernel_residual = 0.0;    // |P~(H(r,tau,r phi) - n)|
    double projection_residual = 0.0;
    int newton_iters = 0;
    bool converged = false;
};

struct FoliationDiagnostics {
    double det_min = 0.0;
    double free_boundary_max_angle = 0.0;
    double tau_slope_fit = 0.0;  // +inf when tau vanishes identically
    double tau_max = 0.0;
    int det_samples = 0;
    bool valid = false;
};

struct FoliationResult {
    MetricModel model;
    HemiPtr ctx;
    std::vector<LeafSolution> leaves;
    FoliationDiagnostics diagnostics;
    bool aborted = false;
    std::string abort_reason;
};

struct KperpDiagnostics {
    int iters = 0;
    double kperp_residual = 0.0;
    double kernel_residual = 0.0;
    double projection_residual = 0.0;
    bool converged = false;
};

/// phi0 with L phi0 = -P-perp(H_r(0,tau,0)): the r = 0 solution and the
/// default warm start.
SurfaceFunction default_phi_init(const HemiPtr& ctx, const MetricModel& model, const Vec& tau);

/// Quasi-Newton solve of P-perp(H(r,tau,r phi) - n) = 0 in K-perp.
/// phi_init empty -> default_phi_init. At r = 0 returns phi0 directly.
SurfaceFunction solve_kperp(const HemiPtr& ctx, const MetricModel& model, double r,
                            const Vec& tau, const std::optional<SurfaceFunction>& phi_init,
                            const SolverOptions& opts, KperpDiagnostics* diag = nullptr);

/// F(r,tau) = P~(H(r,tau,r phi(r,tau)) - n)/r^2 for r > 0, the analytic
/// leading term -c_n grad(hmean)(tau) at r = 0. phi_io, when given, is the
/// warm start and receives the solved phi.
Vec reduced_map(const HemiPtr& ctx, const MetricModel& model, double r, const Vec& tau,
                SurfaceFunction* phi_io, const SolverOptions& opts);

/// Newton on the reduced map with Jacobian -c_n Hess(hmean)(tau).
Vec solve_tau(const HemiPtr& ctx, const MetricModel& model, double r, const Vec& tau_init,
              SurfaceFunction* phi_io, const SolverOptions& opts, int* iters = nullptr);

/// Continuation over the increasing r-grid with warm starts; fills
/// diagnostics when at least two leaves converged.
FoliationResult build_foliation(const HemiPtr& ctx, const MetricModel& model,
                                const std::vector<double>& r_grid, const SolverOptions& opts);

/// Transversality and free-boundary verification report; needs >= 3 leaves
/// (central differences in r). sample_density controls the x-sample grid.
FoliationDiagnostics verify_foliation(const FoliationResult& result, int sample_density);

/// Chart position of the leaf point over x in the unit ball:
/// Upsilon(r,x) = (tau + r(1+r phi) x, r(1+r phi) t(x)), t(x) = sqrt(1-|x|^2).
Vec leaf_chart_point(const LeafSolution& leaf, const HemiPtr& ctx, const Vec& x);

}  // namespace cmcfol
