#include "cmcfol/harmonics.hpp"

#include <algorithm>
#include <map>

#include "cmcfol/errors.hpp"
#include "cmcfol/rational.hpp"

namespace cmcfol {

namespace {

void enumerate_monomials(int vars, int degree, bool even_last, std::vector<MultiIndex>& out) {
    MultiIndex e(vars, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == vars - 1) {
            if (even_last && left % 2 != 0) return;
            e[pos] = left;
            out.push_back(e);
            return;
        }
        for (int d = 0; d <= left; ++d) {
            e[pos] = d;
            self(self, pos + 1, left - d);
        }
        e[pos] = 0;
    };
    rec(rec, 0, degree);
}

/// Exact nullspace of a rational matrix via Gauss-Jordan; returns basis
/// vectors with the conventional free-variable structure.
std::vector<std::vector<Rational>> rational_nullspace(std::vector<std::vector<Rational>> A,
                                                      int cols) {
    const int rows = static_cast<int>(A.size());
    std::vector<int> pivot_col_of_row;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (!(A[i][c] == Rational(0))) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(A[r], A[piv]);
        const Rational inv = Rational(1) / A[r][c];
        for (int j = c; j < cols; ++j) A[r][j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || A[i][c] == Rational(0)) continue;
            const Rational f = A[i][c];
            for (int j = c; j < cols; ++j) A[i][j] -= f * A[r][j];
        }
        pivot_col_of_row.push_back(c);
        ++r;
    }
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivot_col_of_row) is_pivot[c] = true;

    std::vector<std::vector<Rational>> basis;
    for (int c = 0; c < cols; ++c) {
        if (is_pivot[c]) continue;
        std::vector<Rational> v(cols, Rational(0));
        v[c] = Rational(1);
        for (int i = 0; i < r; ++i) v[pivot_col_of_row[i]] = -A[i][c];
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace

std::vector<SeriesQ> even_harmonic_polynomials(int n, int degree) {
    const int vars = n + 1;
    std::vector<MultiIndex> monos, lower;
    enumerate_monomials(vars, degree, /*even_last=*/true, monos);
    std::vector<SeriesQ> out;
    if (degree == 0) {
        out.push_back(SeriesQ::constant(vars, 0, Rational(1)));
        return out;
    }
    enumerate_monomials(vars, degree - 2, /*even_last=*/true, lower);
    std::map<MultiIndex, int> lower_index;
    for (std::size_t i = 0; i < lower.size(); ++i) lower_index[lower[i]] = static_cast<int>(i);

    // Laplacian constraint: row per degree-(k-2) monomial, column per
    // degree-k monomial.
    std::vector<std::vector<Rational>> A(lower.size(),
                                         std::vector<Rational>(monos.size(), Rational(0)));
    for (std::size_t c = 0; c < monos.size(); ++c)
        for (int v = 0; v < vars; ++v) {
            const int ev = monos[c][v];
            if (ev < 2) continue;
            MultiIndex target = monos[c];
            target[v] -= 2;
            A[lower_index.at(target)][c] += Rational(ev) * Rational(ev - 1);
        }

    auto null_basis = rational_nullspace(std::move(A), static_cast<int>(monos.size()));
    for (const auto& v : null_basis) {
        SeriesQ p(vars, degree);
        for (std::size_t c = 0; c < monos.size(); ++c)
            if (!(v[c] == Rational(0))) p.add_term(monos[c], v[c]);
        out.push_back(std::move(p));
    }
    return out;
}

std::shared_ptr<const Hemisphere> Hemisphere::build(int n, int L_max, int exactness) {
    if (n < 2) throw ConfigError("basis: n >= 2 required");
    if (L_max < 2) throw ConfigError("basis: L_max >= 2 required");
    if (exactness < 2 * L_max + 4)
        throw ConfigError("basis: quadrature exactness must be >= 2*L_max + 4");

    auto ctx = std::shared_ptr<Hemisphere>(new Hemisphere());
    ctx->n_ = n;
    ctx->l_max_ = L_max;
    ctx->quad_ = hemisphere_rule(n, exactness);
    const auto& q = ctx->quad_;
    const int N = q.point_count();
    ctx->area_ = q.weights.sum();
    ctx->kernel_norm2_ = ctx->area_ / (n + 1);

    for (int k = 0; k <= L_max; ++k) {
        auto polys = even_harmonic_polynomials(n, k);
        std::vector<SeriesD> dpolys;
        dpolys.reserve(polys.size());
        for (const auto& p : polys) dpolys.push_back(p.to_double_series());

        const int m = static_cast<int>(dpolys.size());
        if (m == 0) continue;
        Eigen::MatrixXd V(m, N);
        for (int i = 0; i < m; ++i) {
            CompiledSeries cs(dpolys[i]);
            for (int j = 0; j < N; ++j) V(i, j) = cs.eval(q.nodes.row(j));
        }

        if (k == 1) {
            // keep the kernel exactly span{x^i} in the coordinate order
            if (m != n) throw Error("basis: expected exactly n even harmonics of degree 1");
            const double norm = std::sqrt(ctx->kernel_norm2_);
            for (int i = 0; i < n; ++i) {
                // even_harmonic_polynomials enumerates monomials in variable
                // order; identify which coordinate this member is
                int var = -1;
                for (int vtry = 0; vtry < n; ++vtry)
                    if (!(dpolys[i].coefficient([&] {
                            MultiIndex e(n + 1, 0);
                            e[vtry] = 1;
                            return e;
                        }()) == 0.0))
                        var = vtry;
                if (var < 0) throw Error("basis: degree-1 member has no coordinate term");
                Member mem;
                mem.degree = 1;
                mem.poly = SeriesD::monomial(n + 1, 1, var, 1, 1.0 / norm);
                mem.compiled = CompiledSeries(mem.poly);
                ctx->members_.push_back(std::move(mem));
            }
            // order by coordinate
            std::sort(ctx->members_.end() - n, ctx->members_.end(),
                      [&](const Member& a, const Member& b) {
                          auto first_var = [&](const Member& mm) {
                              for (const auto& [e, c] : mm.poly.terms())
                                  for (int v = 0; v < n + 1; ++v)
                                      if (e[v] > 0) return v;
                              return -1;
                          };
                          return first_var(a) < first_var(b);
                      });
            continue;
        }

        // Cholesky orthonormalization against the quadrature inner product.
        Eigen::MatrixXd G(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                double s = 0.0;
                for (int a = 0; a < N; ++a) s += q.weights[a] * V(i, a) * V(j, a);
                G(i, j) = G(j, i) = s;
            }
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        if (llt.info() != Eigen::Success)
            throw Error("basis: Gram matrix not positive definite (degree " + std::to_string(k) +
                        ")");
        // rows of C = L^{-1}: new_i = sum_j C(i,j) old_j
        Eigen::MatrixXd C = llt.matrixL().solve(Eigen::MatrixXd::Identity(m, m));
        for (int i = 0; i < m; ++i) {
            SeriesD p(n + 1, k);
            for (int j = 0; j < m; ++j) {
                if (C(i, j) == 0.0) continue;
                p += dpolys[j] * C(i, j);
            }
            Member mem;
            mem.degree = k;
            mem.poly = std::move(p);
            mem.compiled = CompiledSeries(mem.poly);
            ctx->members_.push_back(std::move(mem));
        }
    }

    const int size = static_cast<int>(ctx->members_.size());
    ctx->node_values_.resize(size, N);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < N; ++j)
            ctx->node_values_(i, j) = ctx->members_[i].compiled.eval(q.nodes.row(j));
    ctx->proj_.resize(size, N);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < N; ++j) ctx->proj_(i, j) = q.weights[j] * ctx->node_values_(i, j);

    ctx->kernel_ids_.clear();
    for (int i = 0; i < size; ++i)
        if (ctx->members_[i].degree == 1) ctx->kernel_ids_.push_back(i);
    if (static_cast<int>(ctx->kernel_ids_.size()) != n)
        throw Error("basis: kernel dimension mismatch");

    // Quadrature moments behind the reduced map: m2 = P~(t x^1) . e_1,
    // m4 from P~(t x^1 x^1 x^2) . e_2. The consistency m2 = (n+4) m4 is what
    // makes the divergence terms cancel in the Lemma-4 combination.
    {
        double i_tx1x1 = 0.0, i_tx1x1x2x2 = 0.0;
        for (int j = 0; j < N; ++j) {
            const double x1 = q.nodes(j, 0), x2 = q.nodes(j, 1), t = q.nodes(j, n);
            i_tx1x1 += q.weights[j] * t * x1 * x1;
            i_tx1x1x2x2 += q.weights[j] * t * x1 * x1 * x2 * x2;
        }
        ctx->m2_ = i_tx1x1 / ctx->kernel_norm2_;
        ctx->m4_ = i_tx1x1x2x2 / ctx->kernel_norm2_;
        ctx->c_n_ = ctx->m2_;
    }
    return ctx;
}

SurfaceFunction Hemisphere::make_function(Eigen::VectorXd coeffs) const {
    if (coeffs.size() != size()) throw ShapeError("SurfaceFunction: coefficient count mismatch");
    return {shared_from_this(), std::move(coeffs)};
}

Eigen::VectorXd Hemisphere::values_at_nodes(const SurfaceFunction& f) const {
    return node_values_.transpose() * f.coeffs;
}

double Hemisphere::eval(const SurfaceFunction& f, const Eigen::VectorXd& X) const {
    double acc = 0.0;
    for (int i = 0; i < size(); ++i)
        if (f.coeffs[i] != 0.0) acc += f.coeffs[i] * members_[i].compiled.eval(X);
    return acc;
}

double Hemisphere::integrate_function(const SurfaceFunction& f) const {
    return integrate_values(quad_, values_at_nodes(f));
}

SurfaceFunction Hemisphere::project_values(const Eigen::VectorXd& values, double* residual) const {
    if (values.size() != quad_.weights.size())
        throw ShapeError("project_values: node count mismatch");
    Eigen::VectorXd c = proj_ * values;
    if (residual) {
        Eigen::VectorXd recon = node_values_.transpose() * c;
        *residual = (values - recon).cwiseAbs().maxCoeff();
    }
    return {shared_from_this(), std::move(c)};
}

Eigen::VectorXd Hemisphere::project_K(const SurfaceFunction& f) const {
    Eigen::VectorXd out(n_);
    const double norm = std::sqrt(kernel_norm2_);
    for (int i = 0; i < n_; ++i) out[i] = f.coeffs[kernel_ids_[i]] / norm;
    return out;
}

Eigen::VectorXd Hemisphere::project_K_values(const Eigen::VectorXd& values) const {
    if (values.size() != quad_.weights.size())
        throw ShapeError("project_K_values: node count mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < quad_.point_count(); ++j) {
        const double wv = quad_.weights[j] * values[j];
        for (int i = 0; i < n_; ++i) out[i] += wv * quad_.nodes(j, i);
    }
    return out / kernel_norm2_;
}

SurfaceFunction Hemisphere::project_Kperp(const SurfaceFunction& f) const {
    SurfaceFunction out = f;
    for (int id : kernel_ids_) out.coeffs[id] = 0.0;
    return out;
}

SurfaceFunction Hemisphere::laplace_beltrami(const SurfaceFunction& f) const {
    SurfaceFunction out = f;
    for (int i = 0; i < size(); ++i) out.coeffs[i] *= -eigenvalue(i);
    return out;
}

SurfaceFunction Hemisphere::solve_L(const SurfaceFunction& f, double kernel_tol) const {
    const Eigen::VectorXd k = project_K(f);
    const double scale = std::max(1.0, f.coeffs.norm());
    if (k.norm() > kernel_tol * scale) {
        std::vector<double> kv(k.data(), k.data() + k.size());
        throw SolvabilityError("solve_L: RHS has a kernel component of norm " +
                                   std::to_string(k.norm()),
                               kv);
    }
    SurfaceFunction out = project_Kperp(f);
    for (int i = 0; i < size(); ++i) {
        if (members_[i].degree == 1) continue;
        out.coeffs[i] /= (eigenvalue(i) - n_);
    }
    return out;
}

}  // namespace cmcfol
