#pragma once

#include <optional>
#include <vector>

#include "ctb/reduced.hpp"

namespace ctb {

enum class Family { EllipticL2, HyperbolicL2, Acute, Obtuse, Isosceles, RightAngled };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::EllipticL2: return "elliptic";
        case Family::HyperbolicL2: return "hyperbolic";
        case Family::Acute: return "acute";
        case Family::Obtuse: return "obtuse";
        case Family::Isosceles: return "isosceles";
        case Family::RightAngled: return "right-angled";
    }
    return "?";
}

/// Tolerance under which the two masses are treated as equal (the S^2 family split
/// is discontinuous in mu).
inline constexpr double equal_mass_tol = 1e-12;

/// A classified relative equilibrium. The canonical representative has M0 > 0,
/// m_x = 0, p = 0; the time-reversed twin (m -> -m) is not enumerated.
struct RelativeEquilibrium {
    Geometry geometry;
    Family family = Family::Acute;
    Masses masses;
    double q = 0.0;      // separation (angle on S^2, hyperbolic distance on L^2)
    double alpha = 0.0;  // angle/arc from mu1 to the rotation axis (= theta_1)
    double m_sq = 0.0;   // signed Casimir value C (= M^2 elliptic, -M^2 hyperbolic)
    double M0 = 0.0;     // momentum magnitude, > 0
    double omega = 0.0;  // angular speed, omega^2 = U'(q)/zeta
    double zeta = 0.0;   // (mu1/2) sin 2*theta1 (sinh on L^2)
    ReducedState state;
    double residual = 0.0;  // |vector_field| at `state`

    double theta1() const { return alpha; }
    double theta2() const { return q - alpha; }
};

/// Unique solution of sinh 2(q-alpha) = mu sinh 2*alpha.
inline double l2_axis_angle(double q, double mu) {
    return 0.5 * q + 0.25 * std::log((mu + std::exp(2.0 * q)) / (1.0 + mu * std::exp(2.0 * q)));
}

namespace detail {

inline RelativeEquilibrium finish_re(Geometry g, Family family, const Masses& masses,
                                     const Potential& pot, double q, double alpha, double m_sq,
                                     const Vec3& m) {
    RelativeEquilibrium re;
    re.geometry = g;
    re.family = family;
    re.masses = masses;
    re.q = q;
    re.alpha = alpha;
    re.m_sq = m_sq;
    re.M0 = std::sqrt(std::abs(m_sq));
    re.zeta = 0.5 * masses.mu1 * (g.is_sphere() ? std::sin(2.0 * alpha) : std::sinh(2.0 * alpha));
    re.omega = std::sqrt(pot.du(q) / re.zeta);
    re.state.m = m;
    re.state.q = q;
    re.state.p = 0.0;
    re.residual = vector_field(re.state, masses, g, pot).norm();
    return re;
}

}  // namespace detail

/// Elliptic RE on L^2 at separation q: C = M^2 > 0, periodic rigid motion.
inline RelativeEquilibrium solve_l2_elliptic(double q, const Masses& masses,
                                             const Potential& pot) {
    const Geometry g = Geometry::lobachevsky();
    g.require(q);
    const double mu = masses.mu();
    const double alpha = l2_axis_angle(q, mu);
    const double s = std::sinh(q);
    const double m_sq = masses.mu1 * s * s * s * pot.du(q) /
                        (mu * std::cosh(alpha) * std::cosh(alpha) * std::cosh(q) +
                         std::cosh(alpha) * std::cosh(q - alpha));
    const double M = std::sqrt(m_sq);
    return detail::finish_re(g, Family::EllipticL2, masses, pot, q, alpha, m_sq,
                             Vec3(0.0, M * std::sinh(alpha), M * std::cosh(alpha)));
}

/// Hyperbolic RE on L^2 at separation q: C = -M^2 < 0, unbounded rigid motion.
inline RelativeEquilibrium solve_l2_hyperbolic(double q, const Masses& masses,
                                               const Potential& pot) {
    const Geometry g = Geometry::lobachevsky();
    g.require(q);
    const double mu = masses.mu();
    const double alpha = l2_axis_angle(q, mu);
    const double s = std::sinh(q);
    const double m_sq = masses.mu1 * s * s * s * pot.du(q) /
                        (mu * std::sinh(alpha) * std::sinh(alpha) * std::cosh(q) -
                         std::sinh(alpha) * std::sinh(q - alpha));
    const double M = std::sqrt(m_sq);
    return detail::finish_re(g, Family::HyperbolicL2, masses, pot, q, alpha, -m_sq,
                             Vec3(0.0, M * std::cosh(alpha), M * std::sinh(alpha)));
}

/// There are no parabolic (C = 0) RE; the solver interface records that.
inline std::optional<RelativeEquilibrium> solve_l2_parabolic(double q, const Masses& masses) {
    Geometry::lobachevsky().require(q);
    (void)masses;
    return std::nullopt;
}

struct ParabolicEvidence {
    double min_residual;  // min over the grid and both signs of |cosh 2q +- sinh 2q + mu|
    double mu;
};

/// Evidence that cosh 2q +- sinh 2q + mu = 0 has no solutions: the residual is
/// bounded below by mu > 0 on any grid. cosh 2q +- sinh 2q is evaluated as
/// exp(+-2q), which is the same quantity without the cancellation at large q.
inline ParabolicEvidence parabolic_l2_check(const std::vector<double>& q_grid,
                                            const Masses& masses) {
    const double mu = masses.mu();
    double best = std::numeric_limits<double>::infinity();
    for (double q : q_grid) {
        best = std::min(best, std::abs(std::exp(2.0 * q) + mu));
        best = std::min(best, std::abs(std::exp(-2.0 * q) + mu));
    }
    return {best, mu};
}

/// The two separations compatible with an axis angle alpha on S^2:
///   q_-(alpha) = alpha + arcsin(mu sin 2*alpha)/2   (acute),
///   q_+(alpha) = alpha + pi/2 - arcsin(mu sin 2*alpha)/2   (obtuse),
/// with q_- < 2*alpha < q_+.
inline std::pair<double, double> q_branches(double alpha, double mu) {
    const double beta = 0.5 * std::asin(mu * std::sin(2.0 * alpha));
    return {alpha + beta, alpha + 0.5 * pi - beta};
}

namespace detail {

/// Root of h(a) = mu sin 2a - sin 2(q-a) on the bracket dictated by
/// theta_1, theta_2 in (0, pi/2): bisection to width 1e-14, then a Newton polish.
inline double sphere_axis_angle(double q, double mu) {
    double lo = std::max(0.0, q - 0.5 * pi);
    double hi = std::min(q, 0.5 * pi);
    auto h = [&](double a) { return mu * std::sin(2.0 * a) - std::sin(2.0 * (q - a)); };
    double flo = h(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((h(mid) > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = h(mid);
        } else {
            hi = mid;
        }
    }
    double a = 0.5 * (lo + hi);
    const double dh = 2.0 * mu * std::cos(2.0 * a) + 2.0 * std::cos(2.0 * (q - a));
    if (dh != 0.0) a -= h(a) / dh;
    return a;
}

inline RelativeEquilibrium sphere_re_at(double q, double alpha, Family family,
                                        const Masses& masses, const Potential& pot) {
    const Geometry g = Geometry::sphere();
    const double mu = masses.mu();
    const double s = std::sin(q);
    const double f_mu = std::cos(alpha) * (mu * std::cos(q) * std::cos(alpha) + std::cos(q - alpha));
    const double m_sq = masses.mu1 * s * s * s * pot.du(q) / f_mu;
    const double M = std::sqrt(m_sq);
    return finish_re(g, family, masses, pot, q, alpha, m_sq,
                     Vec3(0.0, M * std::sin(alpha), M * std::cos(alpha)));
}

}  // namespace detail

/// Separations within this distance of pi/2 are treated as pi/2 on S^2
/// (M^2 diverges there for unequal masses).
inline constexpr double sphere_q_half_pi_tol = 1e-7;

/// The unique S^2 RE at separation q, or nullopt when none exists
/// (unequal masses with q = pi/2). Equal masses give the isosceles family
/// (alpha = q/2); at q = pi/2 the pitchfork representative is returned.
inline std::optional<RelativeEquilibrium> solve_sphere(double q, const Masses& masses,
                                                       const Potential& pot) {
    const Geometry g = Geometry::sphere();
    g.require(q);
    const double mu = masses.mu();
    const bool equal = std::abs(mu - 1.0) <= equal_mass_tol;
    const bool at_right_angle = std::abs(q - 0.5 * pi) <= sphere_q_half_pi_tol;

    if (equal) {
        if (at_right_angle)
            return detail::sphere_re_at(0.5 * pi, 0.25 * pi, Family::RightAngled, masses, pot);
        return detail::sphere_re_at(q, 0.5 * q, Family::Isosceles, masses, pot);
    }
    if (at_right_angle) return std::nullopt;

    const double alpha = detail::sphere_axis_angle(q, mu);
    const Family fam = q < 0.5 * pi ? Family::Acute : Family::Obtuse;
    return detail::sphere_re_at(q, alpha, fam, masses, pot);
}

/// Equal-mass RE with separation exactly pi/2, parametrized by the axis angle
/// theta in (0, pi/2) to the mass mu1.
inline RelativeEquilibrium solve_sphere_right_angled(double theta, const Masses& masses,
                                                     const Potential& pot) {
    if (std::abs(masses.mu() - 1.0) > equal_mass_tol)
        throw UnequalMasses("right-angled RE require mu1 == mu2");
    if (!(theta > 0.0 && theta < 0.5 * pi))
        throw DomainError("theta must lie in (0, pi/2)");
    return detail::sphere_re_at(0.5 * pi, theta, Family::RightAngled, masses, pot);
}

/// omega = +sqrt(U'(q)/zeta); the canonical (time-reversal) representative.
inline double angular_speed(const RelativeEquilibrium& re, const Potential& pot) {
    return std::sqrt(pot.du(re.q) / re.zeta);
}

/// S^2 RE parametrized by the axis angle alpha in (0, pi/2) along the acute
/// (q = q_-) or obtuse (q = q_+) branch. No root-finding involved.
inline RelativeEquilibrium sphere_re_from_alpha(double alpha, bool obtuse, const Masses& masses,
                                                const Potential& pot) {
    if (!(alpha > 0.0 && alpha < 0.5 * pi)) throw DomainError("alpha must lie in (0, pi/2)");
    const auto [qm, qp] = q_branches(alpha, masses.mu());
    const double q = obtuse ? qp : qm;
    Family fam = obtuse ? Family::Obtuse : Family::Acute;
    if (std::abs(masses.mu() - 1.0) <= equal_mass_tol)
        fam = (std::abs(q - 0.5 * pi) <= 1e-12) ? Family::RightAngled : Family::Isosceles;
    return detail::sphere_re_at(q, alpha, fam, masses, pot);
}

/// Both RE families at separation q on L^2 (exactly two exist per q).
inline std::vector<RelativeEquilibrium> solve_l2_both(double q, const Masses& masses,
                                                      const Potential& pot) {
    return {solve_l2_elliptic(q, masses, pot), solve_l2_hyperbolic(q, masses, pot)};
}

}  // namespace ctb
