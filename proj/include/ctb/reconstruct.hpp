#pragma once

#include <optional>

#include "ctb/equilibria.hpp"
#include "ctb/integrate.hpp"
#include "ctb/io.hpp"

namespace ctb {

inline Mat3 rot_z(double a) {
    Mat3 r = Mat3::Identity();
    const double c = std::cos(a), s = std::sin(a);
    r(0, 0) = c; r(0, 1) = -s;
    r(1, 0) = s; r(1, 1) = c;
    return r;
}

inline Mat3 rot_x(double a) {
    Mat3 r = Mat3::Identity();
    const double c = std::cos(a), s = std::sin(a);
    r(1, 1) = c; r(1, 2) = -s;
    r(2, 1) = s; r(2, 2) = c;
    return r;
}

/// Hyperbolic rotation about the x axis (an SO(2,1) boost).
inline Mat3 rot_x_hyperbolic(double a) {
    Mat3 r = Mat3::Identity();
    const double c = std::cosh(a), s = std::sinh(a);
    r(1, 1) = c; r(1, 2) = s;
    r(2, 1) = s; r(2, 2) = c;
    return r;
}

/// g^{-1}: transpose on SO(3), K g^T K on SO(2,1).
inline Mat3 group_inverse(const Mat3& g, Geometry geom) {
    if (geom.is_sphere()) return g.transpose();
    return geom.K() * g.transpose() * geom.K();
}

/// Which Euler chart drives the reconstruction.
enum class ReconChart { Sphere, L2Elliptic, L2Hyperbolic };

inline const char* recon_chart_name(ReconChart c) {
    switch (c) {
        case ReconChart::Sphere: return "s2";
        case ReconChart::L2Elliptic: return "l2-elliptic";
        case ReconChart::L2Hyperbolic: return "l2-hyperbolic";
    }
    return "?";
}

/// Reduced trajectory lifted to the ambient space: Euler angles, moving frames and
/// particle positions, with the conserved-quantity monitors used by the tests.
struct AmbientTrajectory {
    Geometry geometry;
    ReconChart chart = ReconChart::Sphere;
    std::vector<double> times;
    std::vector<Eigen::Vector3d> angles;  // (theta,phi,psi) / (kappa,psi,theta)
    std::vector<Mat3> frames;             // g(t)
    std::vector<Vec3> R1, R2;             // particle positions in the fixed frame
    Vec3 M = Vec3::Zero();                // reference fixed-frame momentum
    double M0 = 0.0;
    double constraint_drift = 0.0;  // max | <R,R> -/+ 1 |
    double momentum_drift = 0.0;    // max |g m - M| / M0
    double energy_drift = 0.0;      // max relative |ambient E - reduced H|
    double frame_drift = 0.0;       // max |g^T K g - K|
};

namespace detail {

inline Vec3 body_velocity(const Vec3& omega, const Vec3& r, Geometry g) {
    // d/dt (g r) = g * (omega^ K r) on L^2, g * (omega^ r) on S^2
    return g.is_sphere() ? Vec3(omega.cross(r)) : Vec3(omega.cross(g.K() * r));
}

inline double metric_dot(const Vec3& a, const Vec3& b, Geometry g) {
    return g.is_sphere() ? a.dot(b) : a.dot(g.K() * b);
}

}  // namespace detail

/// Re-integrates the reduced flow from traj.states.front() as an augmented system
/// (m, q, p, angle-quadrature) and assembles the ambient motion at traj.times.
inline AmbientTrajectory reconstruct(const Trajectory& traj, const Masses& masses,
                                     const Potential& pot, ReconChart chart,
                                     double tol = 1e-10,
                                     std::optional<double> M0_override = std::nullopt) {
    if (traj.states.empty()) throw DomainError("empty trajectory");
    const Geometry g =
        chart == ReconChart::Sphere ? Geometry::sphere() : Geometry::lobachevsky();
    const ReducedState s0 = traj.states.front();
    const double c0 = casimir(s0.m, g);

    AmbientTrajectory out;
    out.geometry = g;
    out.chart = chart;

    switch (chart) {
        case ReconChart::Sphere:
            if (!(c0 > 0.0)) throw ChartBreakdown("S^2 reconstruction needs C > 0");
            out.M0 = std::sqrt(c0);
            out.M = Vec3(0.0, 0.0, out.M0);
            break;
        case ReconChart::L2Elliptic:
            if (!(c0 > 0.0) || !(s0.m.z() > 0.0))
                throw ChartBreakdown("elliptic-momentum reconstruction needs C > 0, m_z > 0");
            out.M0 = std::sqrt(c0);
            out.M = Vec3(0.0, 0.0, out.M0);
            break;
        case ReconChart::L2Hyperbolic:
            if (!(c0 < 0.0))
                throw ChartBreakdown("hyperbolic-momentum reconstruction needs C < 0");
            out.M0 = std::sqrt(-c0);
            out.M = Vec3(out.M0, 0.0, 0.0);
            break;
    }
    if (M0_override && std::abs(*M0_override - out.M0) > 1e-9 * std::max(1.0, out.M0))
        throw ChartBreakdown("declared M0 disagrees with the Casimir of the initial state");
    const double m0 = out.M0;
    const double m0sq = m0 * m0;

    auto unpack = [](const Eigen::VectorXd& y) {
        ReducedState s;
        s.m = Vec3(y[0], y[1], y[2]);
        s.q = y[3];
        s.p = y[4];
        return s;
    };
    auto quadrature = [&](const ReducedState& s) {
        const Vec3 w = dh_dm(s, masses, g);
        switch (chart) {
            case ReconChart::Sphere:
                return m0 * (s.m.x() * w.x() + s.m.y() * w.y()) / (m0sq - s.m.z() * s.m.z());
            case ReconChart::L2Elliptic:
                return -m0 * (s.m.x() * w.x() + s.m.y() * w.y()) / (m0sq - s.m.z() * s.m.z());
            case ReconChart::L2Hyperbolic:
                return m0 * (s.m.y() * w.y() + s.m.z() * w.z()) / (m0sq - s.m.x() * s.m.x());
        }
        return 0.0;
    };
    auto chart_guard = [&](const ReducedState& s) {
        double margin = 1.0;
        switch (chart) {
            case ReconChart::Sphere:
                margin = (m0sq - s.m.z() * s.m.z()) / m0sq;
                break;
            case ReconChart::L2Elliptic:
                margin = (s.m.x() * s.m.x() + s.m.y() * s.m.y()) / m0sq;
                break;
            case ReconChart::L2Hyperbolic:
                margin = (m0sq - s.m.x() * s.m.x()) / m0sq;
                break;
        }
        if (margin < 1e-10)
            throw ChartBreakdown("reconstruction chart degenerates along the trajectory");
    };

    auto f = [&](double, const Eigen::VectorXd& y) {
        const ReducedState s = unpack(y);
        const ReducedTangent v = vector_field(s, masses, g, pot);
        Eigen::VectorXd dy(6);
        dy << v.dm.x(), v.dm.y(), v.dm.z(), v.dq, v.dp, quadrature(s);
        return dy;
    };

    Eigen::VectorXd y0(6);
    y0 << s0.m.x(), s0.m.y(), s0.m.z(), s0.q, s0.p, 0.0;

    const double h0 = hamiltonian(s0, masses, g, pot);
    // the atan2-recovered angle (phi, or psi on the hyperbolic chart) is unwrapped
    // continuously; the frame only sees it mod 2*pi
    double unwrap_shift = 0.0;
    bool have_prev = false;
    double prev_angle = 0.0;
    auto unwrap = [&](double a) {
        if (have_prev) {
            double delta = a + unwrap_shift - prev_angle;
            unwrap_shift -= 2.0 * pi * std::round(delta / (2.0 * pi));
        }
        have_prev = true;
        prev_angle = a + unwrap_shift;
        return prev_angle;
    };
    auto emit = [&](double t, const Eigen::VectorXd& y) {
        const ReducedState s = unpack(y);
        chart_guard(s);
        if (std::abs(casimir(s.m, g) - c0) > 1e-9 * std::max(1.0, std::abs(c0)))
            throw ChartBreakdown("Casimir left the leaf during reconstruction");

        double angle = y[5];
        Eigen::Vector3d a;
        Mat3 frame;
        switch (chart) {
            case ReconChart::Sphere: {
                const double th = std::acos(std::clamp(s.m.z() / m0, -1.0, 1.0));
                const double ph = unwrap(std::atan2(s.m.x(), s.m.y()));
                a = {th, ph, angle};
                frame = rot_z(angle) * rot_x(th) * rot_z(ph);
                break;
            }
            case ReconChart::L2Elliptic: {
                const double th = std::acosh(std::max(s.m.z() / m0, 1.0));
                const double ph = unwrap(std::atan2(-s.m.x(), -s.m.y()));
                a = {th, ph, angle};
                frame = rot_z(angle) * rot_x_hyperbolic(th) * rot_z(ph);
                break;
            }
            case ReconChart::L2Hyperbolic: {
                const double th = std::atanh(-s.m.z() / s.m.y());
                const double ps = unwrap(std::atan2(-s.m.y() / std::cosh(th), s.m.x()));
                a = {angle, ps, th};  // (kappa, psi, theta)
                frame = rot_x_hyperbolic(angle) * rot_z(ps) * rot_x_hyperbolic(th);
                break;
            }
        }

        const Vec3 r1(0.0, 0.0, 1.0);
        const Vec3 r2(0.0, g.sn(s.q), g.cs(s.q));
        out.times.push_back(t);
        out.angles.push_back(a);
        out.frames.push_back(frame);
        out.R1.push_back(frame * r1);
        out.R2.push_back(frame * r2);

        const double unit = g.is_sphere() ? 1.0 : -1.0;
        out.constraint_drift = std::max(
            out.constraint_drift,
            std::max(std::abs(detail::metric_dot(out.R1.back(), out.R1.back(), g) - unit),
                     std::abs(detail::metric_dot(out.R2.back(), out.R2.back(), g) - unit)));
        out.momentum_drift =
            std::max(out.momentum_drift, (frame * s.m - out.M).norm() / m0);
        out.frame_drift = std::max(
            out.frame_drift,
            (frame.transpose() * g.K() * frame - g.K()).cwiseAbs().maxCoeff());

        // ambient energy from body-frame velocities; must reproduce the reduced H
        const Vec3 w = dh_dm(s, masses, g);
        const double qdot = dh_dp(s, masses, g);
        const Vec3 u1 = detail::body_velocity(w, r1, g);
        const Vec3 dr2 = qdot * Vec3(0.0, g.cs(s.q), g.sn(s.q) * (g.is_sphere() ? -1.0 : 1.0));
        const Vec3 u2 = detail::body_velocity(w, r2, g) + dr2;
        const double kinetic = 0.5 * masses.mu1 * detail::metric_dot(u1, u1, g) +
                               0.5 * masses.mu2 * detail::metric_dot(u2, u2, g);
        const double e = kinetic + pot.u(s.q);
        out.energy_drift =
            std::max(out.energy_drift, std::abs(e - h0) / std::max(1.0, std::abs(h0)));
    };

    const double t_end = traj.times.back();
    // same controller margin as integrate(), so both integrations agree to ~tol
    detail::dopri5(f, y0, traj.times.front(), t_end, std::max(1e-15, tol / 32.0), traj.times,
                   emit, [](double, const Eigen::VectorXd&) {});
    return out;
}

inline AmbientTrajectory reconstruct_sphere(const Trajectory& traj, const Masses& masses,
                                            const Potential& pot, double tol = 1e-10,
                                            std::optional<double> M0 = std::nullopt) {
    return reconstruct(traj, masses, pot, ReconChart::Sphere, tol, M0);
}

inline AmbientTrajectory reconstruct_l2_elliptic(const Trajectory& traj, const Masses& masses,
                                                 const Potential& pot, double tol = 1e-10,
                                                 std::optional<double> M0 = std::nullopt) {
    return reconstruct(traj, masses, pot, ReconChart::L2Elliptic, tol, M0);
}

inline AmbientTrajectory reconstruct_l2_hyperbolic(const Trajectory& traj, const Masses& masses,
                                                   const Potential& pot, double tol = 1e-10,
                                                   std::optional<double> M0 = std::nullopt) {
    return reconstruct(traj, masses, pot, ReconChart::L2Hyperbolic, tol, M0);
}

/// Residual of the one-parameter-orbit property for RE inputs: g(0)^{-1} g(t) and
/// g(0)^{-1} g(2t) must commute when g(t) = g(0) exp(t xi).
inline double group_orbit_residual(const AmbientTrajectory& at) {
    const std::size_t n = at.frames.size();
    if (n < 3) return 0.0;
    const std::size_t k = (n - 1) / 2;
    const Mat3 g0inv = group_inverse(at.frames.front(), at.geometry);
    const Mat3 h1 = g0inv * at.frames[k];
    const Mat3 h2 = g0inv * at.frames[2 * k];
    return (h1 * h2 - h2 * h1).cwiseAbs().maxCoeff();
}

/// CSV: t, angles (chart order), R1_x..R2_z.
inline void ambient_csv(std::ostream& os, const AmbientTrajectory& at) {
    CsvWriter csv(os);
    const bool hyp = at.chart == ReconChart::L2Hyperbolic;
    csv.header({"t", hyp ? "kappa" : "theta", hyp ? "psi" : "phi", hyp ? "theta" : "psi",
                "R1_x", "R1_y", "R1_z", "R2_x", "R2_y", "R2_z"});
    for (std::size_t i = 0; i < at.times.size(); ++i) {
        csv.row()
            .num(at.times[i])
            .num(at.angles[i][0])
            .num(at.angles[i][1])
            .num(at.angles[i][2])
            .num(at.R1[i].x())
            .num(at.R1[i].y())
            .num(at.R1[i].z())
            .num(at.R2[i].x())
            .num(at.R2[i].y())
            .num(at.R2[i].z());
    }
}

/// SVG of the ambient paths: (X,Y) projection on S^2, Poincare-disk projection on L^2.
inline std::string ambient_svg(const AmbientTrajectory& at) {
    auto project = [&](const Vec3& r) -> std::pair<double, double> {
        if (at.geometry.is_sphere()) return {r.x(), r.y()};
        return {r.x() / (1.0 + r.z()), r.y() / (1.0 + r.z())};
    };
    SvgSeries s1, s2;
    s1.color = "#d62728";
    s2.color = "#1f77b4";
    for (const auto& r : at.R1) s1.points.push_back(project(r));
    for (const auto& r : at.R2) s2.points.push_back(project(r));
    const char* label = at.geometry.is_sphere() ? "X,Y projection" : "Poincare disk";
    return svg_plot({s1, s2}, label, "", 560, 560);
}

}  // namespace ctb
