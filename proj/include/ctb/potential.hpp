#pragma once

#include <array>
#include <functional>
#include <utility>

#include "ctb/types.hpp"

namespace ctb {

/// Attractive interaction potential U(q) on the open q-domain of a geometry.
/// U' > 0 everywhere (attractivity); derivatives up to order four are available
/// through taylor() for jet/normal-form work. d3u/d4u may be absent for custom
/// potentials, in which case they are approximated by central differences of ddu.
struct Potential {
    Geometry geometry;
    double coupling = 1.0;  // k = G*mu1*mu2 for the gravitational family
    std::function<double(double)> eval_u, eval_du, eval_ddu;
    std::function<double(double)> eval_d3u, eval_d4u;  // optional

    double u(double q) const { return eval_u(q); }
    double du(double q) const { return eval_du(q); }
    double ddu(double q) const { return eval_ddu(q); }

    double d3u(double q) const {
        if (eval_d3u) return eval_d3u(q);
        const double h = fd_step(q);
        return (eval_ddu(q + h) - eval_ddu(q - h)) / (2.0 * h);
    }

    double d4u(double q) const {
        if (eval_d4u) return eval_d4u(q);
        const double h = fd_step(q);
        return (eval_ddu(q + h) - 2.0 * eval_ddu(q) + eval_ddu(q - h)) / (h * h);
    }

    /// Derivatives (U, U', U'', U''', U'''') at q, for degree-4 Taylor data.
    std::array<double, 5> taylor(double q) const {
        return {u(q), du(q), ddu(q), d3u(q), d4u(q)};
    }

  private:
    double fd_step(double q) const {
        double room = geometry.is_sphere() ? std::min(q, pi - q) : q;
        return std::min(1e-4, 0.25 * room);
    }
};

/// U(q) = -k/tan(q) on S^2, -k/tanh(q) on L^2, with U' = k/sin^2 q (k/sinh^2 q).
inline Potential gravitational(Geometry g, double k) {
    if (!(k > 0.0)) throw DomainError("gravitational coupling k must be positive");
    Potential pot;
    pot.geometry = g;
    pot.coupling = k;
    if (g.is_sphere()) {
        pot.eval_u = [k](double q) { return -k * std::cos(q) / std::sin(q); };
        pot.eval_du = [k](double q) { double s = std::sin(q); return k / (s * s); };
        pot.eval_ddu = [k](double q) {
            double s = std::sin(q);
            return -2.0 * k * std::cos(q) / (s * s * s);
        };
        pot.eval_d3u = [k](double q) {
            double s = std::sin(q), c = std::cos(q);
            return k * (2.0 + 4.0 * c * c) / (s * s * s * s);
        };
        pot.eval_d4u = [k](double q) {
            double s = std::sin(q), c = std::cos(q);
            return -8.0 * k * c * (2.0 + c * c) / (s * s * s * s * s);
        };
    } else {
        pot.eval_u = [k](double q) { return -k * std::cosh(q) / std::sinh(q); };
        pot.eval_du = [k](double q) { double s = std::sinh(q); return k / (s * s); };
        pot.eval_ddu = [k](double q) {
            double s = std::sinh(q);
            return -2.0 * k * std::cosh(q) / (s * s * s);
        };
        pot.eval_d3u = [k](double q) {
            double s = std::sinh(q), c = std::cosh(q);
            return k * (2.0 + 4.0 * c * c) / (s * s * s * s);
        };
        pot.eval_d4u = [k](double q) {
            double s = std::sinh(q), c = std::cosh(q);
            return -8.0 * k * c * (c * c + 2.0) / (s * s * s * s * s);
        };
    }
    return pot;
}

/// Wrap user maps (u, du, ddu) as a Potential. Attractivity du > 0 is checked on a
/// 1000-point log-spaced grid; the first offending q is reported.
inline Potential custom(Geometry g, std::function<double(double)> u,
                        std::function<double(double)> du, std::function<double(double)> ddu,
                        std::function<double(double)> d3u = {},
                        std::function<double(double)> d4u = {}) {
    const double q_lo = 1e-6;
    const double q_hi = g.is_sphere() ? pi - 1e-6 : 50.0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / (n - 1);
        double q = q_lo * std::pow(q_hi / q_lo, t);
        if (!(du(q) > 0.0)) throw AttractivityViolation(q);
    }
    Potential pot;
    pot.geometry = g;
    pot.coupling = 1.0;
    pot.eval_u = std::move(u);
    pot.eval_du = std::move(du);
    pot.eval_ddu = std::move(ddu);
    pot.eval_d3u = std::move(d3u);
    pot.eval_d4u = std::move(d4u);
    return pot;
}

/// Gravitational potential in the normalization mu1 = 1, G*mu1*mu2 = 1 used by the
/// stability analysis: all formulas depend on the mass ratio mu only.
inline Potential normalized_gravitational(Geometry g) { return gravitational(g, 1.0); }

/// True when the (masses, potential) pair is the normalized gravitational setup the
/// stability closed forms assume.
inline bool is_normalized_setup(const Masses& masses, const Potential& pot, double tol = 1e-12) {
    if (std::abs(masses.mu1 - 1.0) > tol) return false;
    if (std::abs(pot.coupling - 1.0) > tol) return false;
    // probe the gravitational shape: U'(q) * sn(q)^2 == k
    for (double q : {0.3, 0.9, 1.4}) {
        double s = pot.geometry.sn(q);
        if (std::abs(pot.du(q) * s * s - pot.coupling) > 1e-9) return false;
    }
    return true;
}

}  // namespace ctb
