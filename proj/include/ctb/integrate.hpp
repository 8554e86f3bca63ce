#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "ctb/io.hpp"
#include "ctb/reduced.hpp"
#include "ctb/util.hpp"

namespace ctb {

namespace detail {

/// Adaptive Dormand-Prince 5(4) embedded pair with the standard 4th-order dense
/// output polynomial. Integrates y' = f(t,y) from t0 to t1 (either direction) and
/// emits interpolated values at the requested sample times (sorted in the direction
/// of integration). `guard` is called on every accepted step endpoint and may throw.
template <class F, class Emit, class Guard>
void dopri5(F&& f, Eigen::VectorXd y, double t0, double t1, double tol,
            const std::vector<double>& samples, Emit&& emit, Guard&& guard) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640,
                        e5 = -2187.0 / 6784 + 92097.0 / 339200, e6 = 11.0 / 84 - 187.0 / 2100,
                        e7 = -1.0 / 40;
    static const double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    std::size_t next_sample = 0;
    auto emit_upto = [&](double ta, double tb, const Eigen::VectorXd& y0,
                         const Eigen::VectorXd& r2, const Eigen::VectorXd& r3,
                         const Eigen::VectorXd& r4, const Eigen::VectorXd& r5) {
        while (next_sample < samples.size() && dir * (samples[next_sample] - tb) <= 1e-14 * span) {
            const double th = (tb == ta) ? 0.0 : (samples[next_sample] - ta) / (tb - ta);
            const double th1 = 1.0 - th;
            Eigen::VectorXd u = y0 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
            emit(samples[next_sample], u);
            ++next_sample;
        }
    };

    double t = t0;
    Eigen::VectorXd k1 = f(t, y);
    // emit samples coinciding with t0 (and handle the zero-span case)
    {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(y.size());
        while (next_sample < samples.size() &&
               dir * (samples[next_sample] - t0) <= 1e-14 * std::max(span, 1.0)) {
            emit(samples[next_sample], y);
            ++next_sample;
        }
        (void)z;
    }
    if (span == 0.0) return;

    double h = dir * std::min(1e-2 * std::max(span, 1e-6),
                              std::max(1e-8, 1e-2 / std::max(1e-8, k1.norm())));
    bool rejected = false;
    Eigen::VectorXd k2, k3, k4, k5, k6, k7, ynew;
    for (long step = 0; step < 100000000L; ++step) {
        if (next_sample >= samples.size() && dir * (t - t1) >= 0.0) return;
        if (dir * (t + h - t1) > 0.0) h = t1 - t;
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
            throw StepFailure("step size underflow at t = " + std::to_string(t));

        k2 = f(t + c2 * h, y + h * (a21 * k1));
        k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = f(t + h, ynew);

        Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double enorm = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            double sc = tol + tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            enorm += (err[i] / sc) * (err[i] / sc);
        }
        enorm = std::sqrt(enorm / y.size());

        if (enorm <= 1.0) {
            // dense output coefficients for this step
            Eigen::VectorXd ydiff = ynew - y;
            Eigen::VectorXd bspl = h * k1 - ydiff;
            Eigen::VectorXd r5 =
                h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            Eigen::VectorXd r4 = ydiff - h * k7 - bspl;
            emit_upto(t, t + h, y, ydiff, bspl, r4, r5);
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            guard(t, y);
            double fac = std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, rejected ? 1.0 : 5.0);
            h *= fac;
            rejected = false;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(enorm, -0.2));
            rejected = true;
        }
    }
    throw StepFailure("step budget exhausted");
}

}  // namespace detail

/// Integrated reduced trajectory sampled at increasing times, with conservation
/// monitors for the energy and the Casimir.
struct Trajectory {
    std::vector<double> times;
    std::vector<ReducedState> states;
    double energy_drift = 0.0;   // max relative |H(t)-H(0)|
    double casimir_drift = 0.0;  // max relative |C(t)-C(0)|
};

struct IntegrateOptions {
    int samples = 201;     // dense-output points including both endpoints
    double q_min = 1e-6;   // safety bounds; SingularityApproach outside
    double q_max = -1.0;   // <0: geometry default (pi - 1e-6 on S^2, +inf on L^2)
};

/// Dense output at explicit user-requested times (starting at 0, sorted in the
/// direction of integration) with per-step local error <= tol.
inline Trajectory integrate_at(const ReducedState& s0, const std::vector<double>& times,
                               double tol, const Masses& masses, Geometry g,
                               const Potential& pot, IntegrateOptions opt = {}) {
    if (times.empty()) throw DomainError("at least one sample time is required");
    if (!(tol >= 1e-14 && tol <= 1e-3)) throw DomainError("tol must lie in [1e-14, 1e-3]");
    g.require(s0.q);
    // the controller bounds the embedded-pair error estimate; run it a safety factor
    // below the requested tolerance so medium-horizon drifts stay an order under tol
    const double tol_eff = std::max(1e-15, tol / 32.0);
    const double q_hi = opt.q_max > 0 ? opt.q_max
                                      : (g.is_sphere() ? pi - 1e-6
                                                       : std::numeric_limits<double>::infinity());

    const double h0 = hamiltonian(s0, masses, g, pot);
    const double c0 = casimir(s0.m, g);

    Eigen::VectorXd y0(5);
    y0 << s0.m.x(), s0.m.y(), s0.m.z(), s0.q, s0.p;

    auto unpack = [](const Eigen::VectorXd& y) {
        ReducedState s;
        s.m = Vec3(y[0], y[1], y[2]);
        s.q = y[3];
        s.p = y[4];
        return s;
    };
    auto f = [&](double, const Eigen::VectorXd& y) {
        ReducedTangent v = vector_field(unpack(y), masses, g, pot);
        Eigen::VectorXd dy(5);
        dy << v.dm.x(), v.dm.y(), v.dm.z(), v.dq, v.dp;
        return dy;
    };

    Trajectory traj;
    auto emit = [&](double t, const Eigen::VectorXd& y) {
        traj.times.push_back(t);
        traj.states.push_back(unpack(y));
    };
    auto guard = [&](double t, const Eigen::VectorXd& y) {
        if (y[3] < opt.q_min || y[3] > q_hi)
            throw SingularityApproach("q = " + std::to_string(y[3]) +
                                      " left [q_min, q_max] at t = " + std::to_string(t));
        ReducedState s = unpack(y);
        const double dh = std::abs(hamiltonian(s, masses, g, pot) - h0);
        const double dc = std::abs(casimir(s.m, g) - c0);
        traj.energy_drift = std::max(traj.energy_drift, dh / std::max(std::abs(h0), 1e-12));
        traj.casimir_drift = std::max(traj.casimir_drift, dc / std::max(std::abs(c0), 1e-12));
    };

    detail::dopri5(f, y0, 0.0, times.back(), tol_eff, times, emit, guard);
    return traj;
}

/// Integrate the reduced equations from s0 over [0, t_end] (t_end may be negative),
/// sampling at `opt.samples` equispaced times.
inline Trajectory integrate(const ReducedState& s0, double t_end, double tol,
                            const Masses& masses, Geometry g, const Potential& pot,
                            IntegrateOptions opt = {}) {
    return integrate_at(s0, linspace(0.0, t_end, opt.samples), tol, masses, g, pot, opt);
}

/// CSV: t, m_x, m_y, m_z, q, p, H, C.
inline void trajectory_csv(std::ostream& os, const Trajectory& traj, const Masses& masses,
                           Geometry g, const Potential& pot) {
    CsvWriter csv(os);
    csv.header({"t", "m_x", "m_y", "m_z", "q", "p", "H", "C"});
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const ReducedState& s = traj.states[i];
        csv.row()
            .num(traj.times[i])
            .num(s.m.x())
            .num(s.m.y())
            .num(s.m.z())
            .num(s.q)
            .num(s.p)
            .num(hamiltonian(s, masses, g, pot))
            .num(casimir(s.m, g));
    }
}

}  // namespace ctb
