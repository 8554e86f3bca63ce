#pragma once

#include "ctb/potential.hpp"
#include "ctb/types.hpp"

namespace ctb {

/// The kinetic matrix A(q):
///   [ 1   0        0      ]
///   [ 0   1     +-c/s     ]      s,c = sin,cos on S^2 / sinh,cosh on L^2,
///   [ 0 +-c/s  (mu+c^2)/s^2 ]    off-diagonal sign + on S^2, - on L^2.
inline Mat3 a_matrix(double q, double mu, Geometry g) {
    g.require(q);
    const double s = g.sn(q), c = g.cs(q);
    const double a23 = (g.is_sphere() ? 1.0 : -1.0) * c / s;
    Mat3 a = Mat3::Identity();
    a(1, 2) = a(2, 1) = a23;
    a(2, 2) = (mu + c * c) / (s * s);
    return a;
}

/// d/dq of a_matrix.
inline Mat3 a_matrix_dq(double q, double mu, Geometry g) {
    g.require(q);
    const double s = g.sn(q), c = g.cs(q);
    Mat3 a = Mat3::Zero();
    a(1, 2) = a(2, 1) = (g.is_sphere() ? -1.0 : 1.0) / (s * s);
    a(2, 2) = -2.0 * (1.0 + mu) * c / (s * s * s);
    return a;
}

/// Reduced Hamiltonian
///   H = (1/2mu1) [ (m, A(q) m) + 2*sigma*m_x*p + (1+mu)p^2 ] + U(q),
/// sigma = +1 on S^2, -1 on L^2.
inline double hamiltonian(const ReducedState& s, const Masses& masses, Geometry g,
                          const Potential& pot) {
    if (!s.finite()) throw DomainError("non-finite reduced state");
    const double mu = masses.mu();
    const Mat3 a = a_matrix(s.q, mu, g);
    const double kin = s.m.dot(a * s.m) + 2.0 * g.sigma() * s.m.x() * s.p +
                       (1.0 + mu) * s.p * s.p;
    return kin / (2.0 * masses.mu1) + pot.u(s.q);
}

/// Body angular velocity omega = dH/dm = (1/mu1)(A m + sigma p e_x).
inline Vec3 dh_dm(const ReducedState& s, const Masses& masses, Geometry g) {
    const Mat3 a = a_matrix(s.q, masses.mu(), g);
    Vec3 w = a * s.m;
    w.x() += g.sigma() * s.p;
    return w / masses.mu1;
}

inline double dh_dp(const ReducedState& s, const Masses& masses, Geometry g) {
    return (g.sigma() * s.m.x() + (1.0 + masses.mu()) * s.p) / masses.mu1;
}

inline double dh_dq(const ReducedState& s, const Masses& masses, Geometry g,
                    const Potential& pot) {
    const Mat3 ap = a_matrix_dq(s.q, masses.mu(), g);
    return s.m.dot(ap * s.m) / (2.0 * masses.mu1) + pot.du(s.q);
}

/// Casimir of the reduced bracket: (m,m) on S^2, -<m,m>_K = -m_x^2-m_y^2+m_z^2 on L^2.
inline double casimir(const Vec3& m, Geometry g) {
    return g.is_sphere() ? m.squaredNorm()
                         : -m.x() * m.x() - m.y() * m.y() + m.z() * m.z();
}

inline Vec3 casimir_gradient(const Vec3& m, Geometry g) {
    return g.is_sphere() ? Vec3(2.0 * m) : Vec3(-2.0 * m.x(), -2.0 * m.y(), 2.0 * m.z());
}

/// Tangent vector of the reduced equations of motion:
///   mdot = m x dH/dm          (S^2)
///   mdot = (K m) x dH/dm      (L^2)
///   qdot = dH/dp,  pdot = -dH/dq.
struct ReducedTangent {
    Vec3 dm = Vec3::Zero();
    double dq = 0.0;
    double dp = 0.0;

    double norm() const { return std::sqrt(dm.squaredNorm() + dq * dq + dp * dp); }
};

inline ReducedTangent vector_field(const ReducedState& s, const Masses& masses, Geometry g,
                                   const Potential& pot) {
    if (!s.finite()) throw DomainError("non-finite reduced state");
    g.require(s.q);
    const Vec3 w = dh_dm(s, masses, g);
    ReducedTangent out;
    out.dm = g.is_sphere() ? Vec3(s.m.cross(w)) : Vec3((g.K() * s.m).cross(w));
    out.dq = dh_dp(s, masses, g);
    out.dp = -dh_dq(s, masses, g, pot);
    return out;
}

/// Structure constants of the momentum bracket: {m_i, m_j} as a linear form in m.
/// Row (i,j) holds the coefficient vector c with {m_i,m_j} = c . m.
inline Vec3 momentum_bracket(int i, int j, Geometry g) {
    if (i == j) return Vec3::Zero();
    const double sgn = (j == (i + 1) % 3) ? 1.0 : -1.0;
    const int k = 3 - i - j;
    Vec3 c = Vec3::Zero();
    // S^2: {m_x,m_y} = -m_z and cyclic. L^2: {m_x,m_y} = +m_z, others as on S^2.
    double val = -1.0;
    if (!g.is_sphere() && k == 2) val = 1.0;
    c[k] = sgn * val;
    return c;
}

struct BracketReport {
    double max_flow_residual = 0.0;  // |vector_field - bracket-induced flow| (FD partials)
    double jacobi_residual = 0.0;    // cyclic Jacobi sum on (m_x,m_y,m_z)
};

/// Verifies that vector_field agrees with the flow induced by the bracket
/// relations, using Richardson-extrapolated central differences of H as the
/// independent source for the partial derivatives.
inline BracketReport bracket_check(const ReducedState& s, const Masses& masses, Geometry g,
                                   const Potential& pot) {
    auto h_of = [&](const ReducedState& x) { return hamiltonian(x, masses, g, pot); };
    auto fd = [&](auto set, double h0) {
        auto diff = [&](double h) {
            ReducedState a = s, b = s;
            set(a, h);
            set(b, -h);
            return (h_of(a) - h_of(b)) / (2.0 * h);
        };
        return (4.0 * diff(h0 / 2.0) - diff(h0)) / 3.0;
    };
    const double h0 = 1e-3;
    // the q step must respect the distance to the domain boundary, where the
    // potential derivatives blow up
    const double room = g.is_sphere() ? std::min(s.q, pi - s.q) : s.q;
    const double hq = h0 * std::min(1.0, room);
    Vec3 wm;
    for (int i = 0; i < 3; ++i)
        wm[i] = fd([i](ReducedState& x, double h) { x.m[i] += h; }, h0);
    const double wq = fd([](ReducedState& x, double h) { x.q += h; }, hq);
    const double wp = fd([](ReducedState& x, double h) { x.p += h; }, h0);

    ReducedTangent flow;
    for (int i = 0; i < 3; ++i) {
        double v = 0.0;
        for (int j = 0; j < 3; ++j) v += momentum_bracket(i, j, g).dot(s.m) * wm[j];
        flow.dm[i] = v;
    }
    flow.dq = wp;    // {q,p} = 1
    flow.dp = -wq;

    const ReducedTangent vf = vector_field(s, masses, g, pot);
    BracketReport rep;
    rep.max_flow_residual = std::sqrt((vf.dm - flow.dm).squaredNorm() +
                                      (vf.dq - flow.dq) * (vf.dq - flow.dq) +
                                      (vf.dp - flow.dp) * (vf.dp - flow.dp));

    // Jacobi identity on the coordinate functions: each inner bracket is a linear
    // form c.m, so {m_i, c.m} = sum_k c_k {m_i,m_k}; the cyclic sum must vanish.
    Vec3 jac = Vec3::Zero();
    const int idx[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
    for (auto& t : idx) {
        const Vec3 inner = momentum_bracket(t[1], t[2], g);
        for (int k = 0; k < 3; ++k)
            if (inner[k] != 0.0) jac += inner[k] * momentum_bracket(t[0], k, g);
    }
    rep.jacobi_residual = jac.norm();
    return rep;
}

}  // namespace ctb
