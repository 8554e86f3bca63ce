#pragma once

#include <array>
#include <complex>
#include <cstdint>

#include "ctb/leaf.hpp"

namespace ctb {

/// Static tables for dense degree-<=4 polynomials in 4 variables (70 monomials,
/// graded lexicographic order so that monomials of degree <= d form a prefix).
struct JetTables {
    static constexpr int n_terms = 70;
    std::array<std::array<int, 4>, n_terms> exps{};
    std::array<int, n_terms> degree{};
    std::array<int, 5> prefix{};            // #monomials of degree <= d
    std::array<int16_t, 625> index_of{};    // key = e0 + 5e1 + 25e2 + 125e3
    std::array<std::array<int16_t, n_terms>, n_terms> prod{};

    static int key(int e0, int e1, int e2, int e3) {
        return e0 + 5 * e1 + 25 * e2 + 125 * e3;
    }

    int index(int e0, int e1, int e2, int e3) const { return index_of[key(e0, e1, e2, e3)]; }

    static const JetTables& get() {
        static const JetTables t = [] {
            JetTables tb;
            tb.index_of.fill(-1);
            int n = 0;
            for (int d = 0; d <= 4; ++d) {
                for (int e0 = d; e0 >= 0; --e0)
                    for (int e1 = d - e0; e1 >= 0; --e1)
                        for (int e2 = d - e0 - e1; e2 >= 0; --e2) {
                            const int e3 = d - e0 - e1 - e2;
                            tb.exps[n] = {e0, e1, e2, e3};
                            tb.degree[n] = d;
                            tb.index_of[key(e0, e1, e2, e3)] = static_cast<int16_t>(n);
                            ++n;
                        }
                tb.prefix[d] = n;
            }
            for (int i = 0; i < n_terms; ++i)
                for (int j = 0; j < n_terms; ++j) {
                    if (tb.degree[i] + tb.degree[j] > 4) {
                        tb.prod[i][j] = -1;
                        continue;
                    }
                    const auto& a = tb.exps[i];
                    const auto& b = tb.exps[j];
                    tb.prod[i][j] =
                        tb.index_of[key(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])];
                }
            return tb;
        }();
        return t;
    }
};

/// Dense real/complex polynomial in 4 variables truncated at total degree 4.
/// Doubles as the jet type for degree-4 Taylor expansion: all arithmetic truncates,
/// so elementary-function composition yields Taylor coefficients exact to round-off.
template <class T>
struct Poly4 {
    std::array<T, JetTables::n_terms> c{};

    static Poly4 constant(T v) {
        Poly4 p;
        p.c[0] = v;
        return p;
    }
    /// The affine jet v0 + x_k.
    static Poly4 variable(int k, T v0 = T{}) {
        Poly4 p;
        p.c[0] = v0;
        p.c[1 + k] = T{1};
        return p;
    }

    T constant_term() const { return c[0]; }

    Poly4& operator+=(const Poly4& o) {
        for (int i = 0; i < JetTables::n_terms; ++i) c[i] += o.c[i];
        return *this;
    }
    Poly4& operator-=(const Poly4& o) {
        for (int i = 0; i < JetTables::n_terms; ++i) c[i] -= o.c[i];
        return *this;
    }
    Poly4& operator*=(T s) {
        for (auto& v : c) v *= s;
        return *this;
    }

    friend Poly4 operator+(Poly4 a, const Poly4& b) { return a += b; }
    friend Poly4 operator-(Poly4 a, const Poly4& b) { return a -= b; }
    friend Poly4 operator-(Poly4 a) {
        for (auto& v : a.c) v = -v;
        return a;
    }
    friend Poly4 operator+(Poly4 a, T s) {
        a.c[0] += s;
        return a;
    }
    friend Poly4 operator+(T s, Poly4 a) {
        a.c[0] += s;
        return a;
    }
    friend Poly4 operator-(Poly4 a, T s) {
        a.c[0] -= s;
        return a;
    }
    friend Poly4 operator-(T s, const Poly4& a) { return -a + s; }
    friend Poly4 operator*(Poly4 a, T s) { return a *= s; }
    friend Poly4 operator*(T s, Poly4 a) { return a *= s; }
    friend Poly4 operator/(Poly4 a, T s) { return a *= (T{1} / s); }

    friend Poly4 operator*(const Poly4& a, const Poly4& b) {
        const auto& tb = JetTables::get();
        Poly4 r;
        for (int i = 0; i < JetTables::n_terms; ++i) {
            if (a.c[i] == T{}) continue;
            const T ai = a.c[i];
            const int jmax = tb.prefix[4 - tb.degree[i]];
            const auto& row = tb.prod[i];
            for (int j = 0; j < jmax; ++j) {
                if (b.c[j] == T{}) continue;
                r.c[row[j]] += ai * b.c[j];
            }
        }
        return r;
    }

    T eval(const std::array<T, 4>& x) const {
        const auto& tb = JetTables::get();
        T sum{};
        for (int i = 0; i < JetTables::n_terms; ++i) {
            if (c[i] == T{}) continue;
            T term = c[i];
            for (int v = 0; v < 4; ++v)
                for (int e = 0; e < tb.exps[i][v]; ++e) term *= x[v];
            sum += term;
        }
        return sum;
    }

    Poly4 derivative(int k) const {
        const auto& tb = JetTables::get();
        Poly4 r;
        for (int i = 0; i < JetTables::n_terms; ++i) {
            if (c[i] == T{}) continue;
            auto e = tb.exps[i];
            if (e[k] == 0) continue;
            const T coef = c[i] * T(static_cast<double>(e[k]));
            e[k] -= 1;
            r.c[tb.index(e[0], e[1], e[2], e[3])] += coef;
        }
        return r;
    }

    /// Keep only terms of total degree d.
    Poly4 graded_part(int d) const {
        const auto& tb = JetTables::get();
        Poly4 r;
        for (int i = 0; i < JetTables::n_terms; ++i)
            if (tb.degree[i] == d) r.c[i] = c[i];
        return r;
    }

    Poly4 truncate_below(int dmin) const {
        const auto& tb = JetTables::get();
        Poly4 r = *this;
        for (int i = 0; i < JetTables::n_terms; ++i)
            if (tb.degree[i] < dmin) r.c[i] = T{};
        return r;
    }

    double max_abs(int degree_filter = -1) const {
        const auto& tb = JetTables::get();
        double m = 0.0;
        for (int i = 0; i < JetTables::n_terms; ++i)
            if (degree_filter < 0 || tb.degree[i] == degree_filter)
                m = std::max(m, std::abs(c[i]));
        return m;
    }
};

using Jet4 = Poly4<double>;
using CPoly4 = Poly4<std::complex<double>>;

/// g(f) for a univariate g given by its derivatives (g, g', g'', g''', g'''') at the
/// constant term of f: Taylor composition, exact to round-off at this truncation order.
template <class T>
Poly4<T> compose_univariate(const std::array<double, 5>& derivs, const Poly4<T>& f) {
    Poly4<T> d = f;
    d.c[0] = T{};  // the nilpotent part
    Poly4<T> r = Poly4<T>::constant(T(derivs[4] / 24.0));
    r = r * d + T(derivs[3] / 6.0);
    r = r * d + T(derivs[2] / 2.0);
    r = r * d + T(derivs[1]);
    r = r * d + T(derivs[0]);
    return r;
}

inline Jet4 sin(const Jet4& f) {
    const double s = std::sin(f.c[0]), c = std::cos(f.c[0]);
    return compose_univariate({s, c, -s, -c, s}, f);
}
inline Jet4 cos(const Jet4& f) {
    const double s = std::sin(f.c[0]), c = std::cos(f.c[0]);
    return compose_univariate({c, -s, -c, s, c}, f);
}
inline Jet4 sinh(const Jet4& f) {
    const double s = std::sinh(f.c[0]), c = std::cosh(f.c[0]);
    return compose_univariate({s, c, s, c, s}, f);
}
inline Jet4 cosh(const Jet4& f) {
    const double s = std::sinh(f.c[0]), c = std::cosh(f.c[0]);
    return compose_univariate({c, s, c, s, c}, f);
}
inline Jet4 exp(const Jet4& f) {
    const double e = std::exp(f.c[0]);
    return compose_univariate({e, e, e, e, e}, f);
}
inline Jet4 recip(const Jet4& f) {
    const double x = f.c[0];
    if (x == 0.0) throw DomainError("jet reciprocal at 0");
    const double inv = 1.0 / x;
    return compose_univariate(
        {inv, -inv * inv, 2.0 * inv * inv * inv, -6.0 * inv * inv * inv * inv,
         24.0 * inv * inv * inv * inv * inv},
        f);
}
inline Jet4 sqrt(const Jet4& f) {
    const double x = f.c[0];
    if (!(x > 0.0)) throw DomainError("jet sqrt needs positive constant term");
    const double r = std::sqrt(x);
    return compose_univariate(
        {r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x), -0.9375 / (r * x * x * x)}, f);
}
inline Jet4 operator/(const Jet4& a, const Jet4& b) { return a * recip(b); }
inline Jet4 operator/(double s, const Jet4& b) { return recip(b) * s; }

/// Potential value as a jet in q: Taylor data (U..U'''') composed with the q-jet.
inline Jet4 potential_value(const Potential& pot, const Jet4& q) {
    return compose_univariate(pot.taylor(q.c[0]), q);
}

/// result(y) = p(A y): substitute the linear forms given by the rows of A.
template <class T, class M>
Poly4<T> substitute_linear(const Poly4<T>& p, const M& a) {
    const auto& tb = JetTables::get();
    // powers of the four substituted linear forms
    std::array<std::array<Poly4<T>, 5>, 4> pw;
    for (int v = 0; v < 4; ++v) {
        pw[v][0] = Poly4<T>::constant(T{1});
        Poly4<T> lin;
        for (int k = 0; k < 4; ++k) lin.c[1 + k] = T(a(v, k));
        pw[v][1] = lin;
        for (int d = 2; d <= 4; ++d) pw[v][d] = pw[v][d - 1] * lin;
    }
    Poly4<T> r;
    for (int i = 0; i < JetTables::n_terms; ++i) {
        if (p.c[i] == T{}) continue;
        const auto& e = tb.exps[i];
        Poly4<T> term = pw[0][e[0]];
        for (int v = 1; v < 4; ++v)
            if (e[v] > 0) term = term * pw[v][e[v]];
        r += term * p.c[i];
    }
    return r;
}

/// Hessian (matrix of second partials) of the quadratic part.
template <class T>
Mat4 quadratic_hessian(const Poly4<T>& p) {
    const auto& tb = JetTables::get();
    Mat4 h = Mat4::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            std::array<int, 4> e{};
            e[i] += 1;
            e[j] += 1;
            double v;
            if constexpr (std::is_same_v<T, double>)
                v = p.c[tb.index(e[0], e[1], e[2], e[3])];
            else
                v = p.c[tb.index(e[0], e[1], e[2], e[3])].real();
            if (i == j) {
                h(i, i) = 2.0 * v;
            } else {
                h(i, j) = h(j, i) = v;
            }
        }
    return h;
}

/// The quadratic polynomial (1/2) x^T n x.
inline Jet4 poly_from_hessian(const Mat4& n) {
    const auto& tb = JetTables::get();
    Jet4 p;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            std::array<int, 4> e{};
            e[i] += 1;
            e[j] += 1;
            p.c[tb.index(e[0], e[1], e[2], e[3])] = (i == j) ? 0.5 * n(i, i) : n(i, j);
        }
    return p;
}

inline CPoly4 complexify(const Jet4& p) {
    CPoly4 r;
    for (int i = 0; i < JetTables::n_terms; ++i) r.c[i] = p.c[i];
    return r;
}

}  // namespace ctb
