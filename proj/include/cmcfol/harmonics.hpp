#pragma once

// Analysis on the closed upper hemisphere: Neumann-compatible harmonic basis
// (restrictions of solid harmonics even in t, so the equator condition
// d/de_t = 0 holds by reflection symmetry), quadrature inner products, the
// kernel K = span{x^1..x^n}, the projections P~ and P-perp, the
// Laplace-Beltrami operator (diagonal on the basis), and the solve of
// L = -(Delta + n) on K-perp.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "cmcfol/quadrature.hpp"
#include "cmcfol/series.hpp"

namespace cmcfol {

class Hemisphere;

/// Function on S^n_+ expanded in the orthonormal even-harmonic basis.
struct SurfaceFunction {
    std::shared_ptr<const Hemisphere> ctx;
    Eigen::VectorXd coeffs;

    SurfaceFunction() = default;
    SurfaceFunction(std::shared_ptr<const Hemisphere> c, Eigen::VectorXd v)
        : ctx(std::move(c)), coeffs(std::move(v)) {}

    SurfaceFunction& operator+=(const SurfaceFunction& o) {
        coeffs += o.coeffs;
        return *this;
    }
    SurfaceFunction& operator-=(const SurfaceFunction& o) {
        coeffs -= o.coeffs;
        return *this;
    }
    SurfaceFunction& operator*=(double k) {
        coeffs *= k;
        return *this;
    }
    friend SurfaceFunction operator+(SurfaceFunction a, const SurfaceFunction& b) { return a += b; }
    friend SurfaceFunction operator-(SurfaceFunction a, const SurfaceFunction& b) { return a -= b; }
    friend SurfaceFunction operator*(SurfaceFunction a, double k) { return a *= k; }
    friend SurfaceFunction operator*(double k, SurfaceFunction a) { return a *= k; }
};

class Hemisphere : public std::enable_shared_from_this<Hemisphere> {
  public:
    struct Member {
        int degree;            // homogeneity degree k, eigenvalue k(k+n-1)
        SeriesD poly;          // solid harmonic polynomial in (x, t)
        CompiledSeries compiled;
    };

    /// Builds basis and quadrature. Requires exactness >= 2*L_max + 4.
    static std::shared_ptr<const Hemisphere> build(int n, int L_max, int exactness);

    int n() const { return n_; }
    int l_max() const { return l_max_; }
    int size() const { return static_cast<int>(members_.size()); }
    const std::vector<Member>& members() const { return members_; }
    const std::vector<int>& kernel_ids() const { return kernel_ids_; }
    const QuadratureRule& quad() const { return quad_; }
    const Eigen::MatrixXd& node_values() const { return node_values_; }
    double area() const { return area_; }
    double kernel_norm2() const { return kernel_norm2_; }

    // Quadrature-computed moment data (Lemma-4 constants).
    double moment_m2() const { return m2_; }
    double moment_m4() const { return m4_; }
    double moment_constant() const { return c_n_; }  // the Eq.-13 coefficient

    SurfaceFunction zero_function() const {
        return {shared_from_this(), Eigen::VectorXd::Zero(size())};
    }
    SurfaceFunction make_function(Eigen::VectorXd coeffs) const;

    /// Pointwise values at the quadrature nodes.
    Eigen::VectorXd values_at_nodes(const SurfaceFunction& f) const;
    /// Evaluates f at an arbitrary point of S^n_+.
    double eval(const SurfaceFunction& f, const Eigen::VectorXd& X) const;

    double integrate_function(const SurfaceFunction& f) const;

    /// Discrete least squares on the quadrature nodes (the basis is
    /// orthonormal, so this is the plain weighted projection). residual, when
    /// given, receives the sup-norm of values minus the reconstruction.
    SurfaceFunction project_values(const Eigen::VectorXd& values, double* residual = nullptr) const;

    /// P~ of a basis function: component i = <f, x^i> / <x^i, x^i>.
    Eigen::VectorXd project_K(const SurfaceFunction& f) const;
    /// P~ of raw node values.
    Eigen::VectorXd project_K_values(const Eigen::VectorXd& values) const;

    /// Zeroes kernel coefficients; idempotent.
    SurfaceFunction project_Kperp(const SurfaceFunction& f) const;

    /// Multiplies degree-k coefficients by -k(k+n-1).
    SurfaceFunction laplace_beltrami(const SurfaceFunction& f) const;

    /// Solves -(Delta + n) phi = P-perp(f) for phi in K-perp. The kernel
    /// component of f must vanish to kernel_tol, else SolvabilityError with
    /// the offending vector.
    SurfaceFunction solve_L(const SurfaceFunction& f, double kernel_tol = 1e-10) const;

    int member_degree(int i) const { return members_[i].degree; }
    double eigenvalue(int i) const {
        const double k = members_[i].degree;
        return k * (k + n_ - 1);
    }

  private:
    Hemisphere() = default;
    int n_ = 0, l_max_ = 0;
    QuadratureRule quad_;
    std::vector<Member> members_;
    std::vector<int> kernel_ids_;
    Eigen::MatrixXd node_values_;  // size x N
    Eigen::MatrixXd proj_;         // size x N, row i = w_j * Y_i(p_j)
    double area_ = 0, kernel_norm2_ = 0, m2_ = 0, m4_ = 0, c_n_ = 0;
};

/// Even-in-t harmonic homogeneous polynomials of the given degree,
/// exact-rational nullspace of the Laplacian constraint. Exposed for tests.
std::vector<SeriesQ> even_harmonic_polynomials(int n, int degree);

}  // namespace cmcfol
