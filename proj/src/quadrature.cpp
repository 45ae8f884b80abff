#include "cmcfol/quadrature.hpp"

#define _USE_MATH_DEFINES
#include <cmath>

namespace cmcfol {

void gauss_legendre(int k, std::vector<double>& x, std::vector<double>& w) {
    // Golub-Welsch with the analytic Legendre recurrence.
    if (k < 1) throw ConfigError("gauss_legendre: k >= 1 required");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i < k; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x.resize(k);
    w.resize(k);
    for (int i = 0; i < k; ++i) {
        x[i] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        w[i] = 2.0 * v0 * v0;
    }
}

void gauss_polar_rule(int k, int m, bool half, std::vector<double>& x, std::vector<double>& w) {
    if (k < 1 || m < 2) throw ConfigError("gauss_polar_rule: k >= 1, m >= 2 required");

    if (m == 2) {
        // weight 1: plain Gauss-Legendre, mapped to [0,1] when half
        gauss_legendre(k, x, w);
        if (half)
            for (int i = 0; i < k; ++i) {
                x[i] = 0.5 * (x[i] + 1.0);
                w[i] *= 0.5;
            }
        return;
    }

    // Discretized Stieltjes for weight (1-u^2)^{(m-2)/2}. Base rule: the
    // substitution u = sin(psi) (half) or u = -cos(theta) (full) turns the
    // weight into a smooth positive density integrated by a large mapped
    // Gauss-Legendre rule far beyond the accuracy needed for the recurrence
    // coefficients.
    const int K = std::max(24 * k, 200);
    std::vector<double> bx, bw;
    gauss_legendre(K, bx, bw);
    std::vector<double> u(K), bwt(K);
    for (int i = 0; i < K; ++i) {
        if (half) {
            const double psi = 0.25 * M_PI * (bx[i] + 1.0);
            u[i] = std::sin(psi);
            bwt[i] = bw[i] * 0.25 * M_PI * std::pow(std::cos(psi), m - 1);
        } else {
            const double th = 0.5 * M_PI * (bx[i] + 1.0);
            u[i] = -std::cos(th);
            bwt[i] = bw[i] * 0.5 * M_PI * std::pow(std::sin(th), m - 1);
        }
    }

    std::vector<double> alpha(k, 0.0), beta(k, 0.0);
    std::vector<double> p_prev(K, 0.0), p_cur(K, 1.0);
    double norm_prev = 0.0, norm_cur = 0.0;
    for (int i = 0; i < K; ++i) norm_cur += bwt[i];
    beta[0] = norm_cur;
    for (int j = 0; j < k; ++j) {
        double a = 0.0;
        for (int i = 0; i < K; ++i) a += bwt[i] * u[i] * p_cur[i] * p_cur[i];
        alpha[j] = half ? a / norm_cur : 0.0;  // full-domain weight is even in u
        std::vector<double> p_next(K);
        const double b = (j == 0) ? 0.0 : norm_cur / norm_prev;
        for (int i = 0; i < K; ++i)
            p_next[i] = (u[i] - alpha[j]) * p_cur[i] - (j == 0 ? 0.0 : b * p_prev[i]);
        if (j > 0) beta[j] = b;
        p_prev.swap(p_cur);
        p_cur.swap(p_next);
        norm_prev = norm_cur;
        norm_cur = 0.0;
        for (int i = 0; i < K; ++i) norm_cur += bwt[i] * p_cur[i] * p_cur[i];
    }

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) J(i, i) = alpha[i];
    for (int i = 1; i < k; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(beta[i]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x.resize(k);
    w.resize(k);
    for (int i = 0; i < k; ++i) {
        x[i] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        w[i] = beta[0] * v0 * v0;
    }
}

QuadratureRule sphere_rule(int m, int exactness) {
    if (m < 1) throw ConfigError("sphere_rule: m >= 1 required");
    QuadratureRule out;
    out.exactness = exactness;
    if (m == 1) {
        int M = exactness + 1;
        if (M % 2 != 0) ++M;  // even count keeps the rule reflection-symmetric
        out.nodes.resize(M, 2);
        out.weights.resize(M);
        for (int j = 0; j < M; ++j) {
            const double a = 2.0 * M_PI * j / M;
            out.nodes(j, 0) = std::cos(a);
            out.nodes(j, 1) = std::sin(a);
            out.weights[j] = 2.0 * M_PI / M;
        }
        return out;
    }
    const int k = (exactness + 2) / 2;
    std::vector<double> u, wu;
    gauss_polar_rule(k, m, /*half=*/false, u, wu);
    QuadratureRule sub = sphere_rule(m - 1, exactness);
    const int N = k * sub.point_count();
    out.nodes.resize(N, m + 1);
    out.weights.resize(N);
    int row = 0;
    for (int a = 0; a < k; ++a) {
        const double s = std::sqrt(std::max(0.0, 1.0 - u[a] * u[a]));
        for (int b = 0; b < sub.point_count(); ++b, ++row) {
            for (int c = 0; c < m; ++c) out.nodes(row, c) = s * sub.nodes(b, c);
            out.nodes(row, m) = u[a];
            out.weights[row] = wu[a] * sub.weights[b];
        }
    }
    return out;
}

QuadratureRule hemisphere_rule(int n, int exactness) {
    if (n < 2) throw ConfigError("hemisphere_rule: n >= 2 required");
    if (exactness < 2) throw ConfigError("hemisphere_rule: exactness >= 2 required");
    const int k = (exactness + 2) / 2;
    std::vector<double> u, wu;
    gauss_polar_rule(k, n, /*half=*/true, u, wu);
    QuadratureRule sub = sphere_rule(n - 1, exactness);
    QuadratureRule out;
    out.exactness = exactness;
    const int N = k * sub.point_count();
    out.nodes.resize(N, n + 1);
    out.weights.resize(N);
    int row = 0;
    for (int a = 0; a < k; ++a) {
        const double s = std::sqrt(std::max(0.0, 1.0 - u[a] * u[a]));
        for (int b = 0; b < sub.point_count(); ++b, ++row) {
            for (int c = 0; c < n; ++c) out.nodes(row, c) = s * sub.nodes(b, c);
            out.nodes(row, n) = u[a];
            out.weights[row] = wu[a] * sub.weights[b];
        }
    }
    return out;
}

double sphere_area(int m) {
    return 2.0 * std::pow(M_PI, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

double hemisphere_area(int n) { return 0.5 * sphere_area(n); }

double integrate_values(const QuadratureRule& q, const Eigen::VectorXd& values) {
    if (values.size() != q.weights.size())
        throw ShapeError("integrate_values: value count does not match node count");
    double acc = 0.0;
    for (int i = 0; i < q.point_count(); ++i) acc += q.weights[i] * values[i];
    return acc;
}

}  // namespace cmcfol
