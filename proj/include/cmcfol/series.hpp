#pragma once

// Truncated multivariate power series in the Fermi coordinates (x_1..x_n, t).
// Variable index convention throughout the library: indices 0..n-1 are the
// boundary coordinates x_1..x_n, index n is the normal coordinate t.
// Truncation is by total degree; terms above the bound are dropped on every
// operation. Coefficients are either exact rationals (validation paths) or
// doubles (solver paths); conversion is rational -> double only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cmcfol/errors.hpp"
#include "cmcfol/rational.hpp"

namespace cmcfol {

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& e) {
    return std::accumulate(e.begin(), e.end(), 0);
}

template <class Coeff>
class MultiSeries {
  public:
    // std::map keeps terms in lexicographic multi-index order, which fixes
    // the summation order everywhere downstream.
    using TermMap = std::map<MultiIndex, Coeff>;

    MultiSeries() : vars_(1), degree_bound_(0) {}
    MultiSeries(int vars, int degree_bound) : vars_(vars), degree_bound_(degree_bound) {
        if (vars < 1 || degree_bound < 0)
            throw ShapeError("MultiSeries: need vars >= 1 and degree bound >= 0");
    }

    static MultiSeries constant(int vars, int degree_bound, const Coeff& c) {
        MultiSeries s(vars, degree_bound);
        if (!(c == Coeff(0))) s.terms_[MultiIndex(vars, 0)] = c;
        return s;
    }

    /// Monomial c * v^power (v a single variable index).
    static MultiSeries monomial(int vars, int degree_bound, int var, int power,
                                const Coeff& c = Coeff(1)) {
        MultiSeries s(vars, degree_bound);
        if (var < 0 || var >= vars) throw ShapeError("MultiSeries: variable index out of range");
        if (power < 0) throw ShapeError("MultiSeries: negative power");
        if (power > degree_bound || c == Coeff(0)) return s;
        MultiIndex e(vars, 0);
        e[var] = power;
        s.terms_[e] = c;
        return s;
    }

    int vars() const { return vars_; }
    int degree_bound() const { return degree_bound_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    Coeff coefficient(const MultiIndex& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Coeff(0) : it->second;
    }

    /// Adds c to the coefficient of e, dropping the term when it cancels or
    /// exceeds the degree bound.
    void add_term(const MultiIndex& e, const Coeff& c) {
        if ((int)e.size() != vars_) throw ShapeError("MultiSeries: multi-index length mismatch");
        if (c == Coeff(0)) return;
        if (total_degree(e) > degree_bound_) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
            if (it->second == Coeff(0)) terms_.erase(it);
        }
    }

    MultiSeries& operator+=(const MultiSeries& o) {
        check_shape(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    MultiSeries& operator-=(const MultiSeries& o) {
        check_shape(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    MultiSeries& operator*=(const Coeff& k) {
        if (k == Coeff(0)) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= k;
        return *this;
    }

    friend MultiSeries operator+(MultiSeries a, const MultiSeries& b) { return a += b; }
    friend MultiSeries operator-(MultiSeries a, const MultiSeries& b) { return a -= b; }
    friend MultiSeries operator*(MultiSeries a, const Coeff& k) { return a *= k; }
    friend MultiSeries operator*(const Coeff& k, MultiSeries a) { return a *= k; }

    /// Coefficient-wise convolution truncated at the shared degree bound.
    friend MultiSeries operator*(const MultiSeries& a, const MultiSeries& b) {
        a.check_shape(b);
        MultiSeries out(a.vars_, a.degree_bound_);
        MultiIndex e(a.vars_, 0);
        for (const auto& [ea, ca] : a.terms_) {
            const int da = total_degree(ea);
            for (const auto& [eb, cb] : b.terms_) {
                if (da + total_degree(eb) > a.degree_bound_) continue;
                for (int v = 0; v < a.vars_; ++v) e[v] = ea[v] + eb[v];
                out.add_term(e, ca * cb);
            }
        }
        return out;
    }

    bool operator==(const MultiSeries& o) const {
        return vars_ == o.vars_ && degree_bound_ == o.degree_bound_ && terms_ == o.terms_;
    }

    /// Formal partial derivative. The degree bound is kept as stored; the top
    /// coefficients simply become absent.
    MultiSeries derive(int var) const {
        if (var < 0 || var >= vars_) throw ShapeError("series_derive: variable index out of range");
        MultiSeries out(vars_, degree_bound_);
        MultiIndex e(vars_, 0);
        for (const auto& [ea, ca] : terms_) {
            if (ea[var] == 0) continue;
            e = ea;
            e[var] -= 1;
            out.add_term(e, ca * Coeff(ea[var]));
        }
        return out;
    }

    /// Substitutes (x,t) -> (r x, r t): a degree-k term picks up r^k.
    MultiSeries dilate(const Coeff& r) const {
        MultiSeries out(vars_, degree_bound_);
        std::vector<Coeff> rpow(degree_bound_ + 1, Coeff(1));
        for (int k = 1; k <= degree_bound_; ++k) rpow[k] = rpow[k - 1] * r;
        for (const auto& [e, c] : terms_) out.add_term(e, c * rpow[total_degree(e)]);
        return out;
    }

    /// Evaluation with per-variable power tables, terms summed in
    /// lexicographic multi-index order.
    template <class Point>
    Coeff eval(const Point& p) const {
        if ((int)p.size() != vars_) throw ShapeError("series_eval: point length mismatch");
        std::vector<std::vector<Coeff>> pw(vars_);
        for (int v = 0; v < vars_; ++v) {
            pw[v].resize(degree_bound_ + 1);
            pw[v][0] = Coeff(1);
            for (int k = 1; k <= degree_bound_; ++k) pw[v][k] = pw[v][k - 1] * Coeff(p[v]);
        }
        Coeff acc(0);
        for (const auto& [e, c] : terms_) {
            Coeff term = c;
            for (int v = 0; v < vars_; ++v)
                if (e[v] > 0) term *= pw[v][e[v]];
            acc += term;
        }
        return acc;
    }

    MultiSeries<double> to_double_series() const {
        MultiSeries<double> out(vars_, degree_bound_);
        for (const auto& [e, c] : terms_) out.add_term(e, to_double(c));
        return out;
    }

  private:
    void check_shape(const MultiSeries& o) const {
        if (vars_ != o.vars_ || degree_bound_ != o.degree_bound_)
            throw ShapeError("MultiSeries: mismatched vars or degree bound");
    }

    int vars_;
    int degree_bound_;
    TermMap terms_;
};

using SeriesD = MultiSeries<double>;
using SeriesQ = MultiSeries<Rational>;

// ---------------------------------------------------------------------------
// Square matrices of series sharing shape.

template <class Coeff>
class SeriesMatrix {
  public:
    SeriesMatrix() : dim_(0), vars_(1), degree_bound_(0), symmetric_(false) {}
    SeriesMatrix(int dim, int vars, int degree_bound, bool symmetric = false)
        : dim_(dim),
          vars_(vars),
          degree_bound_(degree_bound),
          symmetric_(symmetric),
          entries_(dim * dim, MultiSeries<Coeff>(vars, degree_bound)) {
        if (dim < 1) throw ShapeError("SeriesMatrix: dim >= 1 required");
    }

    static SeriesMatrix identity(int dim, int vars, int degree_bound) {
        SeriesMatrix m(dim, vars, degree_bound, true);
        for (int i = 0; i < dim; ++i)
            m.entry(i, i) = MultiSeries<Coeff>::constant(vars, degree_bound, Coeff(1));
        return m;
    }

    int dim() const { return dim_; }
    int vars() const { return vars_; }
    int degree_bound() const { return degree_bound_; }
    bool symmetric() const { return symmetric_; }
    void set_symmetric(bool s) {
        if (s && !is_symmetric()) throw ValidationError("SeriesMatrix: entries are not symmetric");
        symmetric_ = s;
    }

    MultiSeries<Coeff>& entry(int i, int j) { return entries_[i * dim_ + j]; }
    const MultiSeries<Coeff>& entry(int i, int j) const { return entries_[i * dim_ + j]; }

    bool is_symmetric() const {
        for (int i = 0; i < dim_; ++i)
            for (int j = i + 1; j < dim_; ++j)
                if (!(entry(i, j) == entry(j, i))) return false;
        return true;
    }

    bool is_identity_at_origin() const {
        const MultiIndex zero(vars_, 0);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                if (!(entry(i, j).coefficient(zero) == Coeff(i == j ? 1 : 0))) return false;
        return true;
    }

    friend SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b) {
        if (a.dim_ != b.dim_ || a.vars_ != b.vars_ || a.degree_bound_ != b.degree_bound_)
            throw ShapeError("SeriesMatrix: mismatched shapes in product");
        SeriesMatrix out(a.dim_, a.vars_, a.degree_bound_);
        for (int i = 0; i < a.dim_; ++i)
            for (int j = 0; j < a.dim_; ++j) {
                auto& acc = out.entry(i, j);
                for (int k = 0; k < a.dim_; ++k) acc += a.entry(i, k) * b.entry(k, j);
            }
        return out;
    }

    friend SeriesMatrix operator-(SeriesMatrix a, const SeriesMatrix& b) {
        if (a.dim_ != b.dim_) throw ShapeError("SeriesMatrix: mismatched dims");
        for (int i = 0; i < a.dim_ * a.dim_; ++i) a.entries_[i] -= b.entries_[i];
        a.symmetric_ = a.symmetric_ && b.symmetric_;
        return a;
    }

    SeriesMatrix<double> to_double_matrix() const {
        SeriesMatrix<double> out(dim_, vars_, degree_bound_, false);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) out.entry(i, j) = entry(i, j).to_double_series();
        out.symmetric_hint(symmetric_);
        return out;
    }

    void symmetric_hint(bool s) { symmetric_ = s; }

  private:
    int dim_, vars_, degree_bound_;
    bool symmetric_;
    std::vector<MultiSeries<Coeff>> entries_;
};

/// Truncated Neumann-series inverse of M = I + A: sum_{j<=D} (-1)^j A^j.
/// Exact two-sided inverse modulo terms of degree > D.
template <class Coeff>
SeriesMatrix<Coeff> matrix_series_invert(const SeriesMatrix<Coeff>& M) {
    if (!M.is_identity_at_origin())
        throw Error("matrix_series_invert: degree-0 part must be the identity");
    const int dim = M.dim(), vars = M.vars(), D = M.degree_bound();
    SeriesMatrix<Coeff> A = M - SeriesMatrix<Coeff>::identity(dim, vars, D);
    SeriesMatrix<Coeff> N = SeriesMatrix<Coeff>::identity(dim, vars, D);
    SeriesMatrix<Coeff> P = SeriesMatrix<Coeff>::identity(dim, vars, D);
    for (int j = 1; j <= D; ++j) {
        P = P * A;  // lowest degree of A^j is j; terms vanish past j = D
        const Coeff sign = (j % 2 == 0) ? Coeff(1) : Coeff(-1);
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < dim; ++k) N.entry(i, k) += P.entry(i, k) * sign;
    }
    if (M.symmetric()) N.symmetric_hint(true);
    return N;
}

// ---------------------------------------------------------------------------
// Flat read-only form for hot evaluation loops (double coefficients only).

class CompiledSeries {
  public:
    CompiledSeries() : vars_(1), degree_bound_(0) {}
    explicit CompiledSeries(const SeriesD& s) : vars_(s.vars()), degree_bound_(s.degree_bound()) {
        terms_.reserve(s.terms().size());
        for (const auto& [e, c] : s.terms()) terms_.push_back({e, c});
    }

    int vars() const { return vars_; }
    bool empty() const { return terms_.empty(); }

    /// pw: power table, pw[v*(D+1)+k] = p_v^k, filled by make_power_table.
    double eval_with_table(const double* pw) const {
        const int stride = degree_bound_ + 1;
        double acc = 0.0;
        for (const auto& t : terms_) {
            double term = t.coeff;
            for (int v = 0; v < vars_; ++v) {
                const int e = t.exps[v];
                if (e > 0) term *= pw[v * stride + e];
            }
            acc += term;
        }
        return acc;
    }

    template <class Point>
    void make_power_table(const Point& p, std::vector<double>& pw) const {
        const int stride = degree_bound_ + 1;
        pw.assign(vars_ * stride, 1.0);
        for (int v = 0; v < vars_; ++v)
            for (int k = 1; k <= degree_bound_; ++k) pw[v * stride + k] = pw[v * stride + k - 1] * p[v];
    }

    template <class Point>
    double eval(const Point& p) const {
        std::vector<double> pw;
        make_power_table(p, pw);
        return eval_with_table(pw.data());
    }

  private:
    struct Term {
        MultiIndex exps;
        double coeff;
    };
    int vars_;
    int degree_bound_;
    std::vector<Term> terms_;
};

}  // namespace cmcfol
