#pragma once

#include "ctb/equilibria.hpp"

namespace ctb {

enum class ChartKind { SphereAndoyer, L2Elliptic, L2Hyperbolic };

struct LeafPoint {
    double alpha = 0.0, q = 1.0, z = 0.0, p = 0.0;
};

/// Andoyer-type Darboux chart (alpha, q, z, p) on a symplectic leaf C = const:
///   SphereAndoyer: m = (z, r sin a, r cos a),   r = sqrt(M0^2 - z^2), C = +M0^2
///   L2Elliptic:    m = (z, r sinh a, r cosh a), r = sqrt(M0^2 + z^2), C = +M0^2
///   L2Hyperbolic:  m = (z, r cosh a, r sinh a), r = sqrt(M0^2 - z^2), C = -M0^2
/// The coordinate brackets are {q,p} = 1 and {alpha,z} = +1 on S^2 / -1 on L^2
/// (sign fixed by the Lie-Poisson relations; see structure_matrix()).
struct LeafChart {
    Geometry geometry;
    ChartKind kind = ChartKind::SphereAndoyer;
    double M0 = 1.0;

    double casimir_value() const {
        return (kind == ChartKind::L2Hyperbolic) ? -M0 * M0 : M0 * M0;
    }

    ReducedState to_state(const LeafPoint& x) const {
        ReducedState s;
        s.q = x.q;
        s.p = x.p;
        switch (kind) {
            case ChartKind::SphereAndoyer: {
                require_disk(x.z);
                const double r = std::sqrt(M0 * M0 - x.z * x.z);
                s.m = Vec3(x.z, r * std::sin(x.alpha), r * std::cos(x.alpha));
                break;
            }
            case ChartKind::L2Elliptic: {
                const double r = std::sqrt(M0 * M0 + x.z * x.z);
                s.m = Vec3(x.z, r * std::sinh(x.alpha), r * std::cosh(x.alpha));
                break;
            }
            case ChartKind::L2Hyperbolic: {
                require_disk(x.z);
                const double r = std::sqrt(M0 * M0 - x.z * x.z);
                s.m = Vec3(x.z, r * std::cosh(x.alpha), r * std::sinh(x.alpha));
                break;
            }
        }
        return s;
    }

    LeafPoint from_state(const ReducedState& s) const {
        LeafPoint x;
        x.q = s.q;
        x.p = s.p;
        x.z = s.m.x();
        switch (kind) {
            case ChartKind::SphereAndoyer:
                require_disk(x.z);
                x.alpha = std::atan2(s.m.y(), s.m.z());
                break;
            case ChartKind::L2Elliptic:
                if (!(s.m.z() > 0.0)) throw ChartDomainError("elliptic chart needs m_z > 0");
                x.alpha = std::atanh(s.m.y() / s.m.z());
                break;
            case ChartKind::L2Hyperbolic:
                require_disk(x.z);
                if (!(s.m.y() > 0.0)) throw ChartDomainError("hyperbolic chart needs m_y > 0");
                x.alpha = std::atanh(s.m.z() / s.m.y());
                break;
        }
        return x;
    }

    /// Constant Poisson structure matrix P_ij = {x_i, x_j} in the order (alpha,q,z,p).
    Mat4 structure_matrix() const {
        const double saz = (kind == ChartKind::SphereAndoyer) ? 1.0 : -1.0;
        Mat4 p = Mat4::Zero();
        p(0, 2) = saz;
        p(2, 0) = -saz;
        p(1, 3) = 1.0;
        p(3, 1) = -1.0;
        return p;
    }

    static LeafChart for_re(const RelativeEquilibrium& re) {
        LeafChart c;
        c.geometry = re.geometry;
        c.M0 = re.M0;
        if (re.geometry.is_sphere())
            c.kind = ChartKind::SphereAndoyer;
        else
            c.kind = re.m_sq > 0.0 ? ChartKind::L2Elliptic : ChartKind::L2Hyperbolic;
        return c;
    }

  private:
    void require_disk(double z) const {
        if (!(std::abs(z) < M0)) throw ChartDomainError("|z| must be < M0 on this chart");
    }
};

/// Scalar-generic value of the potential; overloaded for jets in jet.hpp.
inline double potential_value(const Potential& pot, double q) { return pot.u(q); }

/// Restriction of the reduced Hamiltonian to the leaf, written without the chart
/// square roots (H is quadratic in m, so they cancel). T is double or a jet type.
template <class T>
T leaf_hamiltonian(const LeafChart& chart, const Masses& masses, const Potential& pot,
                   const T& alpha, const T& q, const T& z, const T& p) {
    using std::cos;
    using std::cosh;
    using std::sin;
    using std::sinh;
    const double mu = masses.mu();
    const double msq = chart.M0 * chart.M0;
    T kin;
    switch (chart.kind) {
        case ChartKind::SphereAndoyer: {
            T sq = sin(q), cqa = cos(q - alpha), ca = cos(alpha);
            T h = (cqa * cqa + mu * ca * ca) / (sq * sq);
            kin = z * z + (msq - z * z) * h + 2.0 * z * p + (1.0 + mu) * p * p;
            break;
        }
        case ChartKind::L2Elliptic: {
            T sq = sinh(q), cqa = cosh(q - alpha), ca = cosh(alpha);
            T h = (cqa * cqa + mu * ca * ca) / (sq * sq);
            kin = z * z + (msq + z * z) * h - 2.0 * z * p + (1.0 + mu) * p * p;
            break;
        }
        case ChartKind::L2Hyperbolic: {
            T sq = sinh(q), sqa = sinh(q - alpha), sa = sinh(alpha);
            T h = (sqa * sqa + mu * sa * sa) / (sq * sq);
            kin = z * z + (msq - z * z) * h - 2.0 * z * p + (1.0 + mu) * p * p;
            break;
        }
        default:
            throw Error("unknown chart");
    }
    return kin / (2.0 * masses.mu1) + potential_value(pot, q);
}

/// Leaf Hamiltonian at a chart point; consistency contract: equals
/// hamiltonian(to_state(x)) wherever the chart is defined.
inline double restricted_hamiltonian(const LeafChart& chart, const LeafPoint& x,
                                     const Masses& masses, const Potential& pot) {
    if (chart.kind != ChartKind::L2Elliptic && !(std::abs(x.z) < chart.M0))
        throw ChartDomainError("|z| must be < M0 on this chart");
    return leaf_hamiltonian<double>(chart, masses, pot, x.alpha, x.q, x.z, x.p);
}

/// Gradient of the leaf Hamiltonian by Richardson-extrapolated central differences.
inline Eigen::Vector4d leaf_gradient_fd(const LeafChart& chart, const LeafPoint& x,
                                        const Masses& masses, const Potential& pot,
                                        double h0 = 1e-4) {
    auto value = [&](const Eigen::Vector4d& v) {
        return leaf_hamiltonian<double>(chart, masses, pot, v[0], v[1], v[2], v[3]);
    };
    Eigen::Vector4d base(x.alpha, x.q, x.z, x.p);
    Eigen::Vector4d grad;
    for (int i = 0; i < 4; ++i) {
        auto diff = [&](double h) {
            Eigen::Vector4d a = base, b = base;
            a[i] += h;
            b[i] -= h;
            return (value(a) - value(b)) / (2.0 * h);
        };
        grad[i] = (4.0 * diff(h0 / 2.0) - diff(h0)) / 3.0;
    }
    return grad;
}

}  // namespace ctb
