#pragma once

// Template body of the fourth-order inverse-metric polynomial. Term grouping
// follows the degree grading: C1 = 2h t; C2 = Rbar/3 xx + 2h' t x + (R+3hh) t^2;
// and so on through degree 4. Sym_{ab}(T) is the average (T_ab + T_ba)/2 over
// the named pair. The (h^2)' cross term -(1/2)(h_im h_mj)_{,kl} is expanded by
// the Leibniz rule. After assembly the ij block is symmetrized in (i,j); all
// rows are already symmetric except the cubic-in-h part of the t^3 x_k
// coefficient, for which the symmetric part is the one compatible with a
// metric tensor.

// Included from the bottom of cmcfol/metric.hpp; not for direct inclusion.

namespace cmcfol {

namespace detail {

template <class Coeff>
Coeff default_jet_tol(const BoundaryJetT<Coeff>&) {
    return Coeff(0);
}

inline double default_jet_tol(const BoundaryJetT<double>& jet) {
    double m = 0.0;
    for (const auto* v : {&jet.h, &jet.h1, &jet.h2, &jet.h3, &jet.Rtt, &jet.Rtt_k, &jet.Rtt_t,
                          &jet.Rtt_kl, &jet.Rtt_tk, &jet.Rtt_tt, &jet.Rb, &jet.Rb_m, &jet.Rb_mp})
        for (double x : *v) m = std::max(m, std::abs(x));
    return 1e-12 * (1.0 + m);
}

}  // namespace detail

template <class Coeff>
SeriesMatrix<Coeff> inverse_metric_series(const BoundaryJetT<Coeff>& jet) {
    validate_jet(jet, detail::default_jet_tol(jet));
    const int n = jet.n;
    const int dim = n + 1;
    const int vars = n + 1;
    const int D = 4;
    const int T = n;  // index of the t variable

    auto frac = [](long long a, long long b) { return Coeff(a) / Coeff(b); };
    const Coeff half = frac(1, 2);

    // Raw ij block before symmetrization.
    std::vector<MultiSeries<Coeff>> raw(n * n, MultiSeries<Coeff>(vars, D));

    auto add = [&](MultiSeries<Coeff>& S, const Coeff& c, int tpow,
                   std::initializer_list<int> xs) {
        if (c == Coeff(0)) return;
        MultiIndex e(vars, 0);
        e[T] = tpow;
        for (int v : xs) e[v] += 1;
        S.add_term(e, c);
    };

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            MultiSeries<Coeff>& S = raw[i * n + j];

            // degree 0 and 1
            add(S, Coeff(i == j ? 1 : 0), 0, {});
            add(S, Coeff(2) * jet.H(i, j), 1, {});

            // degree 2
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) add(S, frac(1, 3) * jet.RB(i, k, j, l), 0, {k, l});
            for (int k = 0; k < n; ++k) add(S, Coeff(2) * jet.H1(i, j, k), 1, {k});
            {
                Coeff c = jet.RT(i, j);
                for (int k = 0; k < n; ++k) c += Coeff(3) * jet.H(i, k) * jet.H(k, j);
                Coeff corrupted = detail::corrupt_inverse_metric_for_test ? c + Coeff(1) : c;
                add(S, corrupted, 2, {});
            }

            // degree 3
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int m = 0; m < n; ++m)
                        add(S, frac(1, 6) * jet.RBm(i, k, j, l, m), 0, {k, l, m});
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Coeff c = jet.H2(i, j, k, l);
                    Coeff sym(0);
                    for (int m = 0; m < n; ++m)
                        sym += jet.RB(i, k, m, l) * jet.H(m, j) + jet.RB(j, k, m, l) * jet.H(m, i);
                    c += frac(2, 3) * half * sym;
                    add(S, c, 1, {k, l});
                }
            for (int k = 0; k < n; ++k) {
                Coeff c = jet.RTk(i, j, k);
                Coeff sym(0);
                for (int l = 0; l < n; ++l)
                    sym += jet.H1(i, l, k) * jet.H(l, j) + jet.H1(j, l, k) * jet.H(l, i);
                c += Coeff(6) * half * sym;
                add(S, c, 2, {k});
            }
            {
                Coeff c = frac(1, 3) * jet.RTt(i, j);
                Coeff sym(0);
                for (int k = 0; k < n; ++k)
                    sym += jet.RT(i, k) * jet.H(k, j) + jet.RT(j, k) * jet.H(k, i);
                c += frac(8, 3) * half * sym;
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        c += Coeff(4) * jet.H(i, k) * jet.H(k, l) * jet.H(l, j);
                add(S, c, 3, {});
            }

            // degree 4
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int m = 0; m < n; ++m)
                        for (int p = 0; p < n; ++p) {
                            Coeff c = frac(1, 20) * jet.RBmp(i, k, j, l, m, p);
                            for (int q = 0; q < n; ++q)
                                c += frac(1, 15) * jet.RB(i, k, q, l) * jet.RB(j, m, q, p);
                            add(S, c, 0, {k, l, m, p});
                        }
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int m = 0; m < n; ++m) {
                        Coeff c = frac(1, 3) * jet.H3(i, j, k, l, m);
                        Coeff sym1(0), sym2(0);
                        for (int p = 0; p < n; ++p) {
                            sym1 += jet.RBm(i, l, p, m, k) * jet.H(p, j) +
                                    jet.RBm(j, l, p, m, k) * jet.H(p, i);
                            sym2 += jet.RB(i, k, p, l) * jet.H1(p, j, m) +
                                    jet.RB(j, k, p, l) * jet.H1(p, i, m);
                        }
                        c += frac(1, 3) * half * sym1 + frac(2, 3) * half * sym2;
                        add(S, c, 1, {k, l, m});
                    }
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Coeff c = half * jet.RTkl(i, j, k, l);
                    Coeff sym(0);
                    for (int m = 0; m < n; ++m)
                        sym += jet.RB(i, k, m, l) * jet.RT(m, j) + jet.RB(j, k, m, l) * jet.RT(m, i);
                    c += frac(1, 3) * half * sym;
                    sym = Coeff(0);
                    for (int m = 0; m < n; ++m)
                        for (int p = 0; p < n; ++p)
                            sym += (jet.RB(i, k, m, l) * jet.H(p, j) +
                                    jet.RB(j, k, m, l) * jet.H(p, i)) *
                                   jet.H(m, p);
                    c += frac(7, 3) * half * sym;
                    sym = Coeff(0);  // Sym_pj(Rbar_{pkml} h_mj) h_ip
                    for (int p = 0; p < n; ++p) {
                        Coeff u(0);
                        for (int m = 0; m < n; ++m)
                            u += jet.RB(p, k, m, l) * jet.H(m, j) + jet.RB(j, k, m, l) * jet.H(m, p);
                        sym += jet.H(i, p) * u;
                    }
                    c -= frac(4, 3) * half * sym;
                    sym = Coeff(0);  // Sym_ip(Rbar_{ikml} h_mp) h_pj
                    for (int p = 0; p < n; ++p) {
                        Coeff u(0);
                        for (int m = 0; m < n; ++m)
                            u += jet.RB(i, k, m, l) * jet.H(m, p) + jet.RB(p, k, m, l) * jet.H(m, i);
                        sym += u * jet.H(p, j);
                    }
                    c -= frac(4, 3) * half * sym;
                    for (int m = 0; m < n; ++m)
                        for (int p = 0; p < n; ++p)
                            c += frac(4, 3) * jet.RB(m, k, p, l) * jet.H(i, m) * jet.H(p, j);
                    for (int m = 0; m < n; ++m) {
                        c += Coeff(4) * half *
                             (jet.H2(i, m, k, l) * jet.H(m, j) + jet.H2(j, m, k, l) * jet.H(m, i));
                        // -(1/2)(h_im h_mj)_{,kl} via Leibniz
                        c -= half * (jet.H2(i, m, k, l) * jet.H(m, j) +
                                     jet.H1(i, m, k) * jet.H1(m, j, l) +
                                     jet.H1(i, m, l) * jet.H1(m, j, k) +
                                     jet.H(i, m) * jet.H2(m, j, k, l));
                        c += Coeff(4) * jet.H1(i, m, k) * jet.H1(m, j, l);
                    }
                    add(S, c, 2, {k, l});
                }
            for (int k = 0; k < n; ++k) {
                Coeff c = frac(1, 3) * jet.RTtk(i, j, k);
                Coeff sym(0);
                for (int l = 0; l < n; ++l)
                    sym += jet.RTk(i, l, k) * jet.H(l, j) + jet.RTk(j, l, k) * jet.H(l, i);
                c += frac(8, 3) * half * sym;
                sym = Coeff(0);
                for (int l = 0; l < n; ++l)
                    sym += jet.RT(i, l) * jet.H1(l, j, k) + jet.RT(j, l) * jet.H1(l, i, k);
                c += frac(8, 3) * half * sym;
                for (int l = 0; l < n; ++l)
                    for (int m = 0; m < n; ++m) {
                        c += Coeff(8) * jet.H1(j, l, k) * jet.H(l, m) * jet.H(i, m);
                        c += Coeff(4) * jet.H1(m, l, k) * jet.H(l, j) * jet.H(i, m);
                    }
                add(S, c, 3, {k});
            }
            {
                Coeff c = frac(1, 12) * jet.RTtt(i, j);
                for (int k = 0; k < n; ++k) {
                    c -= frac(1, 3) * jet.RTt(i, k) * jet.RTt(k, j);
                    c += jet.RT(i, k) * jet.RT(k, j);
                }
                Coeff sym(0);
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        sym += (jet.RT(i, k) * jet.H(l, j) + jet.RT(j, k) * jet.H(l, i)) *
                               jet.H(k, l);
                c += Coeff(6) * half * sym;
                sym = Coeff(0);
                for (int k = 0; k < n; ++k)
                    sym += jet.RTt(i, k) * jet.H(k, j) + jet.RTt(j, k) * jet.H(k, i);
                c += frac(5, 6) * half * sym;
                sym = Coeff(0);  // Sym_lj(R_tktj h_lk) h_il
                for (int l = 0; l < n; ++l) {
                    Coeff u(0);
                    for (int k = 0; k < n; ++k)
                        u += jet.RT(k, j) * jet.H(l, k) + jet.RT(k, l) * jet.H(j, k);
                    sym += jet.H(i, l) * u;
                }
                c -= frac(8, 3) * half * sym;
                sym = Coeff(0);  // Sym_il(R_tktl h_ik) h_lj
                for (int l = 0; l < n; ++l) {
                    Coeff u(0);
                    for (int k = 0; k < n; ++k)
                        u += jet.RT(k, l) * jet.H(i, k) + jet.RT(k, i) * jet.H(l, k);
                    sym += u * jet.H(l, j);
                }
                c -= frac(8, 3) * half * sym;
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        c += frac(13, 3) * jet.RT(k, l) * jet.H(i, k) * jet.H(l, j);
                        for (int m = 0; m < n; ++m)
                            c += Coeff(5) * jet.H(i, k) * jet.H(k, l) * jet.H(l, m) * jet.H(m, j);
                    }
                add(S, c, 4, {});
            }
        }

    SeriesMatrix<Coeff> out(dim, vars, D);
    out.entry(T, T) = MultiSeries<Coeff>::constant(vars, D, Coeff(1));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            MultiSeries<Coeff> s = raw[i * n + j];
            if (i != j) {
                s += raw[j * n + i];
                s *= half;
                out.entry(j, i) = s;
            }
            out.entry(i, j) = s;
        }
    out.symmetric_hint(true);
    return out;
}

}  // namespace cmcfol
