#pragma once

// Boundary-geometry jet at one boundary point: the second fundamental form,
// the ambient curvature components R_{titj}, the boundary curvature
// R-bar_{ikjl}, and the covariant derivatives of each that enter the
// fourth-order inverse-metric polynomial. Underlined (boundary) derivative
// slots follow the storage order written in the field names: h1(i,j,k) is
// h_{ij,k}, Rb(i,k,j,l) keeps the index order of R-bar_{ikjl}, etc.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cmcfol/errors.hpp"
#include "cmcfol/rational.hpp"

namespace cmcfol {

template <class Coeff>
struct BoundaryJetT {
    int n = 0;

    std::vector<Coeff> h;       // n^2       h_{ij}
    std::vector<Coeff> h1;      // n^3       h_{ij,k}
    std::vector<Coeff> h2;      // n^4       h_{ij,kl}
    std::vector<Coeff> h3;      // n^5       h_{ij,klm}
    std::vector<Coeff> Rtt;     // n^2       R_{titj}
    std::vector<Coeff> Rtt_k;   // n^3       R_{titj,k}
    std::vector<Coeff> Rtt_t;   // n^2       R_{titj,t}
    std::vector<Coeff> Rtt_kl;  // n^4       R_{titj,kl}
    std::vector<Coeff> Rtt_tk;  // n^3       R_{titj,tk}
    std::vector<Coeff> Rtt_tt;  // n^2       R_{titj,tt}
    std::vector<Coeff> Rb;      // n^4       Rbar_{ikjl}
    std::vector<Coeff> Rb_m;    // n^5       Rbar_{ikjl,m}
    std::vector<Coeff> Rb_mp;   // n^6       Rbar_{ikjl,mp}

    BoundaryJetT() = default;
    explicit BoundaryJetT(int n_) : n(n_) { allocate(); }

    void allocate() {
        const std::size_t n1 = n, n2 = n1 * n1, n3 = n2 * n1, n4 = n3 * n1, n5 = n4 * n1,
                          n6 = n5 * n1;
        h.assign(n2, Coeff(0));
        h1.assign(n3, Coeff(0));
        h2.assign(n4, Coeff(0));
        h3.assign(n5, Coeff(0));
        Rtt.assign(n2, Coeff(0));
        Rtt_k.assign(n3, Coeff(0));
        Rtt_t.assign(n2, Coeff(0));
        Rtt_kl.assign(n4, Coeff(0));
        Rtt_tk.assign(n3, Coeff(0));
        Rtt_tt.assign(n2, Coeff(0));
        Rb.assign(n4, Coeff(0));
        Rb_m.assign(n5, Coeff(0));
        Rb_mp.assign(n6, Coeff(0));
    }

    // clang-format off
    Coeff& H(int i, int j)                       { return h[i * n + j]; }
    Coeff& H1(int i, int j, int k)               { return h1[(i * n + j) * n + k]; }
    Coeff& H2(int i, int j, int k, int l)        { return h2[((i * n + j) * n + k) * n + l]; }
    Coeff& H3(int i, int j, int k, int l, int m) { return h3[(((i * n + j) * n + k) * n + l) * n + m]; }
    Coeff& RT(int i, int j)                      { return Rtt[i * n + j]; }
    Coeff& RTk(int i, int j, int k)              { return Rtt_k[(i * n + j) * n + k]; }
    Coeff& RTt(int i, int j)                     { return Rtt_t[i * n + j]; }
    Coeff& RTkl(int i, int j, int k, int l)      { return Rtt_kl[((i * n + j) * n + k) * n + l]; }
    Coeff& RTtk(int i, int j, int k)             { return Rtt_tk[(i * n + j) * n + k]; }
    Coeff& RTtt(int i, int j)                    { return Rtt_tt[i * n + j]; }
    Coeff& RB(int i, int k, int j, int l)        { return Rb[((i * n + k) * n + j) * n + l]; }
    Coeff& RBm(int i, int k, int j, int l, int m) { return Rb_m[(((i * n + k) * n + j) * n + l) * n + m]; }
    Coeff& RBmp(int i, int k, int j, int l, int m, int p) { return Rb_mp[((((i * n + k) * n + j) * n + l) * n + m) * n + p]; }

    const Coeff& H(int i, int j) const                       { return h[i * n + j]; }
    const Coeff& H1(int i, int j, int k) const               { return h1[(i * n + j) * n + k]; }
    const Coeff& H2(int i, int j, int k, int l) const        { return h2[((i * n + j) * n + k) * n + l]; }
    const Coeff& H3(int i, int j, int k, int l, int m) const { return h3[(((i * n + j) * n + k) * n + l) * n + m]; }
    const Coeff& RT(int i, int j) const                      { return Rtt[i * n + j]; }
    const Coeff& RTk(int i, int j, int k) const              { return Rtt_k[(i * n + j) * n + k]; }
    const Coeff& RTt(int i, int j) const                     { return Rtt_t[i * n + j]; }
    const Coeff& RTkl(int i, int j, int k, int l) const      { return Rtt_kl[((i * n + j) * n + k) * n + l]; }
    const Coeff& RTtk(int i, int j, int k) const             { return Rtt_tk[(i * n + j) * n + k]; }
    const Coeff& RTtt(int i, int j) const                    { return Rtt_tt[i * n + j]; }
    const Coeff& RB(int i, int k, int j, int l) const        { return Rb[((i * n + k) * n + j) * n + l]; }
    const Coeff& RBm(int i, int k, int j, int l, int m) const { return Rb_m[(((i * n + k) * n + j) * n + l) * n + m]; }
    const Coeff& RBmp(int i, int k, int j, int l, int m, int p) const { return Rb_mp[((((i * n + k) * n + j) * n + l) * n + m) * n + p]; }
    // clang-format on

    bool is_zero() const {
        auto allz = [](const std::vector<Coeff>& v) {
            for (const auto& c : v)
                if (!(c == Coeff(0))) return false;
            return true;
        };
        return allz(h) && allz(h1) && allz(h2) && allz(h3) && allz(Rtt) && allz(Rtt_k) &&
               allz(Rtt_t) && allz(Rtt_kl) && allz(Rtt_tk) && allz(Rtt_tt) && allz(Rb) &&
               allz(Rb_m) && allz(Rb_mp);
    }

    BoundaryJetT<double> to_double_jet() const {
        BoundaryJetT<double> out(n);
        auto conv = [](const std::vector<Coeff>& src, std::vector<double>& dst) {
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] = to_double(src[i]);
        };
        conv(h, out.h);
        conv(h1, out.h1);
        conv(h2, out.h2);
        conv(h3, out.h3);
        conv(Rtt, out.Rtt);
        conv(Rtt_k, out.Rtt_k);
        conv(Rtt_t, out.Rtt_t);
        conv(Rtt_kl, out.Rtt_kl);
        conv(Rtt_tk, out.Rtt_tk);
        conv(Rtt_tt, out.Rtt_tt);
        conv(Rb, out.Rb);
        conv(Rb_m, out.Rb_m);
        conv(Rb_mp, out.Rb_mp);
        return out;
    }
};

using BoundaryJet = BoundaryJetT<double>;
using BoundaryJetQ = BoundaryJetT<Rational>;

namespace detail {
template <class Coeff>
bool close(const Coeff& a, const Coeff& b, const Coeff& tol) {
    const Coeff d = a - b;
    return (d < Coeff(0) ? -d : d) <= tol;
}
inline bool finite_entry(double x) { return std::isfinite(x); }
inline bool finite_entry(const Rational&) { return true; }
}  // namespace detail

/// Checks the structural symmetries: h-type and Rtt-type tensors symmetric in
/// their base pair (i,j); Rb-type tensors antisymmetric under i<->k and
/// j<->l and symmetric under pair exchange (i,k)<->(j,l). tol = 0 gives the
/// exact check used in rational mode. Throws ValidationError naming the
/// violated symmetry.
template <class Coeff>
void validate_jet(const BoundaryJetT<Coeff>& jet, const Coeff& tol = Coeff(0)) {
    const int n = jet.n;
    if (n < 1) throw ValidationError("jet: dimension must be positive");
    auto fail = [](const std::string& what) { throw ValidationError("jet: " + what); };

    auto check_all_finite = [&](const std::vector<Coeff>& v, const char* name) {
        for (const auto& c : v)
            if (!detail::finite_entry(c)) fail(std::string(name) + " has a non-finite entry");
    };
    check_all_finite(jet.h, "h");
    check_all_finite(jet.h1, "h1");
    check_all_finite(jet.h2, "h2");
    check_all_finite(jet.h3, "h3");
    check_all_finite(jet.Rtt, "Rtt");
    check_all_finite(jet.Rtt_k, "Rtt_k");
    check_all_finite(jet.Rtt_t, "Rtt_t");
    check_all_finite(jet.Rtt_kl, "Rtt_kl");
    check_all_finite(jet.Rtt_tk, "Rtt_tk");
    check_all_finite(jet.Rtt_tt, "Rtt_tt");
    check_all_finite(jet.Rb, "Rb");
    check_all_finite(jet.Rb_m, "Rb_m");
    check_all_finite(jet.Rb_mp, "Rb_mp");

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) {
            if (!detail::close(jet.H(i, j), jet.H(j, i), tol)) fail("h not symmetric in (i,j)");
            if (!detail::close(jet.RT(i, j), jet.RT(j, i), tol)) fail("Rtt not symmetric in (i,j)");
            if (!detail::close(jet.RTt(i, j), jet.RTt(j, i), tol))
                fail("Rtt_t not symmetric in (i,j)");
            if (!detail::close(jet.RTtt(i, j), jet.RTtt(j, i), tol))
                fail("Rtt_tt not symmetric in (i,j)");
            for (int k = 0; k < n; ++k) {
                if (!detail::close(jet.H1(i, j, k), jet.H1(j, i, k), tol))
                    fail("h1 not symmetric in base (i,j)");
                if (!detail::close(jet.RTk(i, j, k), jet.RTk(j, i, k), tol))
                    fail("Rtt_k not symmetric in base (i,j)");
                if (!detail::close(jet.RTtk(i, j, k), jet.RTtk(j, i, k), tol))
                    fail("Rtt_tk not symmetric in base (i,j)");
                for (int l = 0; l < n; ++l) {
                    if (!detail::close(jet.H2(i, j, k, l), jet.H2(j, i, k, l), tol))
                        fail("h2 not symmetric in base (i,j)");
                    if (!detail::close(jet.RTkl(i, j, k, l), jet.RTkl(j, i, k, l), tol))
                        fail("Rtt_kl not symmetric in base (i,j)");
                    for (int m = 0; m < n; ++m)
                        if (!detail::close(jet.H3(i, j, k, l, m), jet.H3(j, i, k, l, m), tol))
                            fail("h3 not symmetric in base (i,j)");
                }
            }
        }

    // Curvature symmetries of Rbar and its derivative slots.
    auto check_curv = [&](auto&& get, const char* name, int extra) {
        std::vector<int> d(extra, 0);
        auto loop_extra = [&](auto&& self, int pos) -> void {
            if (pos == extra) {
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k)
                        for (int j = 0; j < n; ++j)
                            for (int l = 0; l < n; ++l) {
                                const Coeff& v = get(i, k, j, l, d);
                                if (!detail::close(v, -get(k, i, j, l, d), tol))
                                    fail(std::string(name) + " not antisymmetric under i<->k");
                                if (!detail::close(v, -get(i, k, l, j, d), tol))
                                    fail(std::string(name) + " not antisymmetric under j<->l");
                                if (!detail::close(v, get(j, l, i, k, d), tol))
                                    fail(std::string(name) +
                                         " not symmetric under pair exchange (i,k)<->(j,l)");
                            }
                return;
            }
            for (d[pos] = 0; d[pos] < n; ++d[pos]) self(self, pos + 1);
        };
        loop_extra(loop_extra, 0);
    };
    check_curv([&](int i, int k, int j, int l, const std::vector<int>&) -> const Coeff& {
        return jet.RB(i, k, j, l);
    }, "Rb", 0);
    check_curv([&](int i, int k, int j, int l, const std::vector<int>& d) -> const Coeff& {
        return jet.RBm(i, k, j, l, d[0]);
    }, "Rb_m", 1);
    check_curv([&](int i, int k, int j, int l, const std::vector<int>& d) -> const Coeff& {
        return jet.RBmp(i, k, j, l, d[0], d[1]);
    }, "Rb_mp", 2);
}

/// Jet whose only nonzero slot is h = kappa * identity (umbilic boundary).
template <class Coeff>
BoundaryJetT<Coeff> umbilic_jet(int n, const Coeff& kappa) {
    BoundaryJetT<Coeff> jet(n);
    for (int i = 0; i < n; ++i) jet.H(i, i) = kappa;
    return jet;
}

/// Random rational jet with all Lemma-1 symmetries, small numerators and
/// denominators so exact-arithmetic products stay cheap.
BoundaryJetQ random_rational_jet(int n, std::mt19937_64& rng);

inline BoundaryJet random_jet(int n, std::mt19937_64& rng) {
    return random_rational_jet(n, rng).to_double_jet();
}

}  // namespace cmcfol
