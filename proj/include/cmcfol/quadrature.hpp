#pragma once

// Product quadrature on the closed upper hemisphere S^n_+ of R^{n+1}.
// Polar direction: Gauss rule for the weight (1-u^2)^{(n-2)/2} on [0,1]
// (u = t), built by a discretized Stieltjes procedure plus Golub-Welsch;
// equatorial factor: recursive sphere rule ending in an even equispaced
// circle rule. Exact for polynomials up to the requested total degree.

#include <vector>

#include <Eigen/Dense>

#include "cmcfol/errors.hpp"

namespace cmcfol {

struct QuadratureRule {
    Eigen::MatrixXd nodes;    // N x (n+1); rows on S^n_+, |node| = 1, t = last coord >= 0
    Eigen::VectorXd weights;  // positive, summing to area(S^n_+)
    int exactness = 0;

    int point_count() const { return static_cast<int>(nodes.rows()); }
    int ambient_dim() const { return static_cast<int>(nodes.cols()); }
};

/// Gauss-Legendre on [-1,1], exact through degree 2k-1.
void gauss_legendre(int k, std::vector<double>& x, std::vector<double>& w);

/// Gauss rule for weight (1-u^2)^{(m-2)/2}, either on [0,1] (half = true)
/// or [-1,1]. m >= 2.
void gauss_polar_rule(int k, int m, bool half, std::vector<double>& x, std::vector<double>& w);

/// Quadrature on the full sphere S^m in R^{m+1}, exact through `exactness`.
QuadratureRule sphere_rule(int m, int exactness);

/// Quadrature on S^n_+ in R^{n+1}, exact through `exactness`. n >= 2.
QuadratureRule hemisphere_rule(int n, int exactness);

double sphere_area(int m);
double hemisphere_area(int n);

/// Weighted sum of pointwise values, fixed node order.
double integrate_values(const QuadratureRule& q, const Eigen::VectorXd& values);

}  // namespace cmcfol
