#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ctb {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double pi = std::numbers::pi;

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Argument outside the q-domain (0,pi) / (0,inf), or too close to a boundary.
struct DomainError : Error {
    using Error::Error;
};

/// custom() potential failed the U'(q) > 0 check on the validation grid.
struct AttractivityViolation : Error {
    double q;
    explicit AttractivityViolation(double q_)
        : Error("potential is not attractive at q = " + std::to_string(q_)), q(q_) {}
};

/// Leaf-chart coordinates outside the chart domain (e.g. |z| >= M0).
struct ChartDomainError : Error {
    using Error::Error;
};

/// Reconstruction chart degenerates along the trajectory (|m_z| -> M0 etc.).
struct ChartBreakdown : Error {
    using Error::Error;
};

/// Integrator hit the q safety bounds near a collision/antipodal singularity.
struct SingularityApproach : Error {
    using Error::Error;
};

/// Adaptive step size underflowed.
struct StepFailure : Error {
    using Error::Error;
};

/// Operation requires mu1 == mu2.
struct UnequalMasses : Error {
    using Error::Error;
};

/// Linear normalization rejected a (near) 1:1 resonant or degenerate quadratic part.
struct ResonantLinearPart : Error {
    using Error::Error;
};

/// Homological equation met a denominator k1*alpha1 + k2*alpha2 ~ 0.
struct SmallDenominator : Error {
    int k1, k2;
    SmallDenominator(int k1_, int k2_)
        : Error("small denominator at combination (" + std::to_string(k1_) + "," +
                std::to_string(k2_) + ")"),
          k1(k1_), k2(k2_) {}
};

/// Closed-form path requires the normalized setup mu1 = 1, G*mu1*mu2 = 1.
struct NormalizationError : Error {
    using Error::Error;
};

enum class Surface { Sphere, Lobachevsky };

/// Constant-curvature surface: the unit sphere S^2 or the Lobachevsky plane L^2
/// (upper hyperboloid sheet in Minkowski 3-space).
struct Geometry {
    Surface tag = Surface::Sphere;

    static Geometry sphere() { return {Surface::Sphere}; }
    static Geometry lobachevsky() { return {Surface::Lobachevsky}; }

    bool is_sphere() const { return tag == Surface::Sphere; }

    /// Metric sign matrix K = diag(1,1,metric_zz()); its own inverse.
    double metric_zz() const { return is_sphere() ? 1.0 : -1.0; }

    Mat3 K() const {
        Mat3 k = Mat3::Identity();
        k(2, 2) = metric_zz();
        return k;
    }

    /// Sign of the kinetic cross term 2*sigma*m_x*p: +1 on S^2, -1 on L^2.
    double sigma() const { return is_sphere() ? 1.0 : -1.0; }

    double q_max() const { return is_sphere() ? pi : std::numeric_limits<double>::infinity(); }

    /// sin q on S^2, sinh q on L^2.
    double sn(double q) const { return is_sphere() ? std::sin(q) : std::sinh(q); }
    /// cos q on S^2, cosh q on L^2.
    double cs(double q) const { return is_sphere() ? std::cos(q) : std::cosh(q); }

    /// q strictly inside the domain, at least `margin` away from the boundaries.
    bool contains(double q, double margin = 1e-8) const {
        if (!std::isfinite(q) || q < margin) return false;
        return is_sphere() ? q < pi - margin : true;
    }

    void require(double q, double margin = 1e-8) const {
        if (!contains(q, margin))
            throw DomainError("q = " + std::to_string(q) + " outside the " +
                              (is_sphere() ? std::string("(0,pi)") : std::string("(0,inf)")) +
                              " domain");
    }

    const char* name() const { return is_sphere() ? "s2" : "l2"; }
};

inline bool operator==(Geometry a, Geometry b) { return a.tag == b.tag; }

struct Masses {
    double mu1 = 1.0;
    double mu2 = 1.0;

    Masses() = default;
    Masses(double m1, double m2) : mu1(m1), mu2(m2) {
        if (!(m1 > 0.0) || !(m2 > 0.0)) throw DomainError("masses must be positive");
    }

    /// Mass ratio mu = mu1/mu2.
    double mu() const { return mu1 / mu2; }

    /// The normalized setup mu1 = 1, G*mu1*mu2 = 1 used by the stability closed forms;
    /// the free parameter is the ratio mu.
    static Masses normalized(double mu) { return Masses(1.0, 1.0 / mu); }
};

/// Point (m, q, p) of the 5-dimensional reduced phase space.
struct ReducedState {
    Vec3 m = Vec3::Zero();
    double q = 1.0;
    double p = 0.0;

    bool finite() const {
        return m.allFinite() && std::isfinite(q) && std::isfinite(p);
    }
};

}  // namespace ctb
