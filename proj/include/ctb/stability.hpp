#pragma once

#include <Eigen/Eigenvalues>
#include <complex>

#include "ctb/leaf.hpp"
#include "ctb/util.hpp"

namespace ctb {

struct Signature {
    int n_plus = 0, n_minus = 0, n_zero = 0;
    bool operator==(const Signature&) const = default;
};

/// Inertia of a symmetric matrix; eigenvalues with |lambda| <= tol * max|lambda|
/// count as zero.
inline Signature signature(const Eigen::MatrixXd& m, double tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    Signature sig;
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i]) <= tol * scale)
            ++sig.n_zero;
        else if (ev[i] > 0.0)
            ++sig.n_plus;
        else
            ++sig.n_minus;
    }
    return sig;
}

namespace detail {

inline void require_normalized_re(const RelativeEquilibrium& re) {
    // The closed-form Hessian entries assume mu1 = 1, G*mu1*mu2 = 1, gravitational U.
    // Under that normalization M^2 satisfies a closed-form relation in (q, alpha); verify it.
    const double mu = re.masses.mu();
    const Geometry g = re.geometry;
    const double s = g.sn(re.q), ca = g.cs(re.alpha), cqa = g.cs(re.q - re.alpha);
    double expected;
    if (g.is_sphere() || re.m_sq > 0.0) {
        expected = s / (ca * (mu * ca * g.cs(re.q) + cqa));
    } else {
        const double sa = std::sinh(re.alpha), sqa = std::sinh(re.q - re.alpha);
        expected = s / (sa * (mu * sa * std::cosh(re.q) - sqa));
    }
    if (std::abs(re.masses.mu1 - 1.0) > 1e-12 ||
        std::abs(std::abs(re.m_sq) - expected) > 1e-9 * std::max(1.0, expected))
        throw NormalizationError(
            "closed-form Hessian requires the normalized gravitational setup");
}

}  // namespace detail

/// Closed-form leaf Hessian blocks at an RE, order (alpha,q | z,p), for the
/// normalized gravitational setup (mu1 = 1, k = 1). Block-diagonal 2x2 + 2x2.
inline Mat4 hessian_at_re(const RelativeEquilibrium& re) {
    detail::require_normalized_re(re);
    const double mu = re.masses.mu();
    const double q = re.q, a = re.alpha, msq = std::abs(re.m_sq);
    Mat4 h = Mat4::Zero();
    if (re.geometry.is_sphere()) {
        const double s = std::sin(q);
        const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2;
        h(0, 0) = -msq * (std::cos(2.0 * (q - a)) + mu * std::cos(2.0 * a)) / s2;
        h(0, 1) = h(1, 0) =
            msq * (-s * std::cos(2.0 * a) + (1.0 + mu) * std::cos(q) * std::sin(2.0 * a)) / s3;
        h(1, 1) = msq * (1.0 + mu) * std::cos(a) * std::cos(a) / s4;
        h(2, 2) = -std::cos(a) * (std::cos(2.0 * q - a) + mu * std::cos(a)) / s2;
        h(2, 3) = h(3, 2) = 1.0;
        h(3, 3) = 1.0 + mu;
        return h;
    }
    const double s = std::sinh(q);
    const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2;
    h(0, 0) = msq * (std::cosh(2.0 * (q - a)) + mu * std::cosh(2.0 * a)) / s2;
    h(0, 1) = h(1, 0) =
        -msq * (-s * std::cosh(2.0 * a) + (1.0 + mu) * std::cosh(q) * std::sinh(2.0 * a)) / s3;
    h(2, 3) = h(3, 2) = -1.0;
    h(3, 3) = 1.0 + mu;
    if (re.m_sq > 0.0) {  // elliptic leaf
        h(1, 1) = msq * (1.0 + mu) * std::cosh(a) * std::cosh(a) / s4;
        h(2, 2) = std::cosh(a) * (std::cosh(2.0 * q - a) + mu * std::cosh(a)) / s2;
    } else {  // hyperbolic leaf
        h(1, 1) = msq * (1.0 + mu) * std::sinh(a) * std::sinh(a) / s4;
        h(2, 2) = (-std::cosh(2.0 * (q - a)) + std::cosh(2.0 * q) -
                   2.0 * mu * std::sinh(a) * std::sinh(a)) /
                  (std::cosh(2.0 * q) - 1.0);
    }
    return h;
}

/// Second derivatives of the restricted Hamiltonian by Richardson-extrapolated
/// central differences; the independent numeric route of the Hessian pair.
/// The q step shrinks with the distance to the domain boundary, where the higher
/// potential derivatives grow like 1/sin^k q.
inline Mat4 hessian_numeric(const RelativeEquilibrium& re, const Potential& pot,
                            double h0 = 5e-3) {
    const LeafChart chart = LeafChart::for_re(re);
    auto value = [&](const Eigen::Vector4d& v) {
        return leaf_hamiltonian<double>(chart, re.masses, pot, v[0], v[1], v[2], v[3]);
    };
    const Eigen::Vector4d x0(re.alpha, re.q, 0.0, 0.0);
    const double room = re.geometry.is_sphere() ? std::min(re.q, pi - re.q) : re.q;
    const Eigen::Vector4d steps(h0, h0 * std::min(1.0, room), h0, h0);
    auto second = [&](int i, int j, double scale) {
        const double hi = steps[i] * scale, hj = steps[j] * scale;
        if (i == j) {
            Eigen::Vector4d a = x0, b = x0;
            a[i] += hi;
            b[i] -= hi;
            return (value(a) - 2.0 * value(x0) + value(b)) / (hi * hi);
        }
        Eigen::Vector4d pp = x0, pm = x0, mp = x0, mm = x0;
        pp[i] += hi; pp[j] += hj;
        pm[i] += hi; pm[j] -= hj;
        mp[i] -= hi; mp[j] += hj;
        mm[i] -= hi; mm[j] -= hj;
        return (value(pp) - value(pm) - value(mp) + value(mm)) / (4.0 * hi * hj);
    };
    Mat4 h = Mat4::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            const double r = (4.0 * second(i, j, 0.5) - second(i, j, 1.0)) / 3.0;
            h(i, j) = h(j, i) = r;
        }
    return h;
}

/// f(q,alpha): the determinant factor whose sign matches sign(det Hessian).
///   S^2:            1 - 4 sin^2 a sin^2(q-a)
///   L^2 elliptic:   1 - 4 sinh^2 a sinh^2(q-a)
///   L^2 hyperbolic: -(4 cosh^2 a cosh^2(q-a) - 1)   (always negative)
inline double f_indicator(const RelativeEquilibrium& re) {
    const double a = re.alpha, d = re.q - re.alpha;
    if (re.geometry.is_sphere()) {
        const double sa = std::sin(a), sd = std::sin(d);
        return 1.0 - 4.0 * sa * sa * sd * sd;
    }
    if (re.m_sq > 0.0) {
        const double sa = std::sinh(a), sd = std::sinh(d);
        return 1.0 - 4.0 * sa * sa * sd * sd;
    }
    const double ca = std::cosh(a), cd = std::cosh(d);
    return -(4.0 * ca * ca * cd * cd - 1.0);
}

/// Characteristic coefficients of the leaf linearization, P(lambda) = l^4 + a l^2 + b.
/// On S^2 (normalized setup) the closed forms are used:
///   a = M^2 (1 + cos 2(q-alpha)) / (sin^2 q sin^2 alpha),  b = a^2 f / 4.
/// Otherwise a = -tr(L^2)/2 and b = det N with L = P N.
inline std::pair<double, double> char_coeffs(const RelativeEquilibrium& re, const Mat4& hess) {
    if (re.geometry.is_sphere()) {
        try {
            detail::require_normalized_re(re);
            const double s = std::sin(re.q), sa = std::sin(re.alpha);
            const double a = std::abs(re.m_sq) * (1.0 + std::cos(2.0 * (re.q - re.alpha))) /
                             (s * s * sa * sa);
            return {a, a * a * f_indicator(re) / 4.0};
        } catch (const NormalizationError&) {
            // fall through to the linearization route
        }
    }
    const Mat4 p = LeafChart::for_re(re).structure_matrix();
    const Mat4 lin = p * hess;
    return {-0.5 * (lin * lin).trace(), hess.determinant()};
}

/// R1 = a^2/4 - b (1:1), R2 = 4a^2/25 - b (2:1), R3 = 9a^2/100 - b (3:1).
/// In the elliptic regime R2 = 0 iff Omega2 = 2 Omega1, R3 = 0 iff Omega2 = 3 Omega1.
struct ResonanceIndicators {
    double R1, R2, R3;
};

inline ResonanceIndicators resonance_indicators(double a, double b) {
    return {0.25 * a * a - b, 4.0 / 25.0 * a * a - b, 9.0 / 100.0 * a * a - b};
}

/// Eigenvalues of the linearization. Uses the quartic resolvent l^4 + a l^2 + b when
/// the Hessian is block-diagonal (it is at every RE), otherwise a dense solver.
inline std::array<std::complex<double>, 4> linearization_eigenvalues(
    const RelativeEquilibrium& re, const Mat4& hess, double a, double b) {
    const double off = hess.topRightCorner<2, 2>().cwiseAbs().maxCoeff();
    if (off <= 1e-9 * hess.cwiseAbs().maxCoeff()) {
        const std::complex<double> disc = std::sqrt(std::complex<double>(a * a - 4.0 * b, 0.0));
        const std::complex<double> l2a = 0.5 * (-a + disc), l2b = 0.5 * (-a - disc);
        const std::complex<double> ra = std::sqrt(l2a), rb = std::sqrt(l2b);
        return {ra, -ra, rb, -rb};
    }
    const Mat4 lin = LeafChart::for_re(re).structure_matrix() * hess;
    Eigen::EigenSolver<Mat4> es(lin);
    std::array<std::complex<double>, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = es.eigenvalues()[i];
    return out;
}

enum class Verdict { Elliptic, LinearlyUnstable, DefiniteStable, Degenerate };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Elliptic: return "elliptic";
        case Verdict::LinearlyUnstable: return "linearly-unstable";
        case Verdict::DefiniteStable: return "definite-stable";
        case Verdict::Degenerate: return "degenerate";
    }
    return "?";
}

struct StabilityReport {
    Family family;
    double q, alpha, M0;
    Mat4 hessian;
    Signature sig;
    double char_a, char_b;
    double f;
    double R1, R2, R3;
    std::array<std::complex<double>, 4> eigenvalues;
    Verdict verdict;
};

/// Full leaf stability analysis at an RE. The verdict is computed from the numbers
/// (signature, spectrum, degeneracy indicator), not from a family lookup; the
/// family-by-family stability statements are enforced by the test suite.
inline StabilityReport classify(const RelativeEquilibrium& re, const Potential& pot) {
    StabilityReport rep;
    rep.family = re.family;
    rep.q = re.q;
    rep.alpha = re.alpha;
    rep.M0 = re.M0;
    try {
        rep.hessian = hessian_at_re(re);
    } catch (const NormalizationError&) {
        rep.hessian = hessian_numeric(re, pot);
    }
    rep.sig = signature(rep.hessian);
    std::tie(rep.char_a, rep.char_b) = char_coeffs(re, rep.hessian);
    rep.f = f_indicator(re);
    const auto r = resonance_indicators(rep.char_a, rep.char_b);
    rep.R1 = r.R1;
    rep.R2 = r.R2;
    rep.R3 = r.R3;
    rep.eigenvalues = linearization_eigenvalues(re, rep.hessian, rep.char_a, rep.char_b);

    double max_abs = 0.0, max_re = 0.0;
    bool has_zero = false;
    for (const auto& l : rep.eigenvalues) {
        max_abs = std::max(max_abs, std::abs(l));
        max_re = std::max(max_re, std::abs(l.real()));
    }
    for (const auto& l : rep.eigenvalues)
        if (std::abs(l) <= 1e-12 * max_abs) has_zero = true;

    if (std::abs(rep.f) < 1e-10)
        rep.verdict = Verdict::Degenerate;
    else if (rep.sig == Signature{4, 0, 0} || rep.sig == Signature{0, 4, 0})
        rep.verdict = Verdict::DefiniteStable;
    else if (rep.sig.n_minus % 2 == 1)
        rep.verdict = Verdict::LinearlyUnstable;
    else if (!has_zero && max_re <= 1e-8 * max_abs)
        rep.verdict = Verdict::Elliptic;
    else
        rep.verdict = Verdict::LinearlyUnstable;
    return rep;
}

struct CriticalAngle {
    double alpha_star, q_star;
};

/// Critical axis angle and separation where the RE branch changes stability:
///   L^2: f~(u) = 2u(1 - sqrt(1 + 4 mu^2 u(1+u))) + 1 = 0, u = sinh^2 alpha*,
///        q* = alpha* + arcsinh(mu sinh 2 alpha*)/2  (any mu > 0);
///   S^2: cos 2a = 2 sin^2 a sqrt(1 - mu^2 sin^2 2a) on (0, pi/2), q* = q_+(alpha*)
///        (mu in (0,1]; mu = 1 degenerates to the pitchfork alpha* = pi/4).
inline CriticalAngle critical_angle(double mu, Geometry g) {
    if (!(mu > 0.0)) throw DomainError("mu must be positive");
    if (!g.is_sphere()) {
        auto f = [&](double u) {
            return 2.0 * u * (1.0 - std::sqrt(1.0 + 4.0 * mu * mu * u * (1.0 + u))) + 1.0;
        };
        double lo = 0.0, hi = 1.0;
        while (f(hi) > 0.0) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) > 0.0 ? lo : hi) = mid;
        }
        double u = 0.5 * (lo + hi);
        const double d = 1.0 + 4.0 * mu * mu * u * (1.0 + u);
        const double df = 2.0 * (1.0 - std::sqrt(d)) - 4.0 * u * mu * mu * (1.0 + 2.0 * u) / std::sqrt(d);
        if (df != 0.0) u -= f(u) / df;
        const double alpha = std::asinh(std::sqrt(u));
        return {alpha, alpha + 0.5 * std::asinh(mu * std::sinh(2.0 * alpha))};
    }
    if (mu > 1.0) throw DomainError("S^2 critical angle requires mu in (0,1]");
    auto gfun = [&](double a) {
        const double s2 = std::sin(2.0 * a);
        return std::cos(2.0 * a) -
               2.0 * std::sin(a) * std::sin(a) * std::sqrt(1.0 - mu * mu * s2 * s2);
    };
    double lo = 0.0, hi = 0.5 * pi;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gfun(mid) > 0.0 ? lo : hi) = mid;
    }
    double a = 0.5 * (lo + hi);
    {
        const double h = 1e-7;
        const double d = (gfun(a + h) - gfun(a - h)) / (2.0 * h);
        if (d != 0.0) {
            const double step = gfun(a) / d;
            if (std::abs(step) < 1e-6) a -= step;
        }
    }
    return {a, q_branches(a, mu).second};
}

/// Samples (param, M^2) along one RE family in the normalized setup. For the
/// right-angled family the parameter is theta; otherwise it is q.
inline std::vector<std::pair<double, double>> momentum_along_branch(
    double mu, Geometry g, Family family, const std::vector<double>& grid) {
    const Masses masses = Masses::normalized(mu);
    const Potential pot = normalized_gravitational(g);
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double t : grid) {
        switch (family) {
            case Family::EllipticL2:
                out.emplace_back(t, solve_l2_elliptic(t, masses, pot).m_sq);
                break;
            case Family::HyperbolicL2:
                out.emplace_back(t, -solve_l2_hyperbolic(t, masses, pot).m_sq);
                break;
            case Family::RightAngled:
                out.emplace_back(t, solve_sphere_right_angled(t, masses, pot).m_sq);
                break;
            default: {
                auto re = solve_sphere(t, masses, pot);
                if (re) out.emplace_back(t, re->m_sq);
                break;
            }
        }
    }
    return out;
}

}  // namespace ctb
