#pragma once

#include <Eigen/Eigenvalues>

#include "ctb/jet.hpp"
#include "ctb/stability.hpp"

namespace ctb {

/// Degree-4 Birkhoff normal form data at an elliptic equilibrium:
///   H = (1/2)(a1 I1 + a2 I2) + (1/4)(b11 I1^2 + 2 b12 I1 I2 + b22 I2^2) + O5,
/// I_j = x_j^2 + y_j^2, |alpha_j| = Omega_j, Omega1 < Omega2.
struct NormalForm4 {
    double omega1 = 0.0, omega2 = 0.0;
    double alpha1 = 0.0, alpha2 = 0.0;
    double beta11 = 0.0, beta12 = 0.0, beta22 = 0.0;
    double arnold_d = 0.0;
    // resonance margins relative to the band 1e-6 * a^2 (a = Omega1^2 + Omega2^2):
    // near_* is true when the indicator lies inside the band.
    bool near_11 = false, near_21 = false, near_31 = false;
    double margin_11 = 0.0, margin_21 = 0.0, margin_31 = 0.0;
};

/// D = 2 b12 a1 a2 - b11 a2^2 - b22 a1^2 (the 3x3 bordered determinant).
inline double arnold_determinant(const NormalForm4& nf) {
    return 2.0 * nf.beta12 * nf.alpha1 * nf.alpha2 - nf.beta11 * nf.alpha2 * nf.alpha2 -
           nf.beta22 * nf.alpha1 * nf.alpha1;
}

/// Relative width of the near-resonance band on R2, R3 (and R1).
inline constexpr double resonance_band = 1e-6;

/// Degree-4 Taylor polynomial of the leaf Hamiltonian at an RE, in the shifted chart
/// coordinates (alpha - alpha0, q - q0, z, p). Constant term removed; the linear
/// part vanishes because the RE is a critical point.
inline Jet4 taylor4(const LeafChart& chart, const RelativeEquilibrium& re,
                    const Masses& masses, const Potential& pot) {
    const Jet4 a = Jet4::variable(0, re.alpha);
    const Jet4 q = Jet4::variable(1, re.q);
    const Jet4 z = Jet4::variable(2, 0.0);
    const Jet4 p = Jet4::variable(3, 0.0);
    Jet4 h = leaf_hamiltonian<Jet4>(chart, masses, pot, a, q, z, p);
    h.c[0] = 0.0;
    const double lin = h.max_abs(1);
    const double scale = std::max(1.0, h.max_abs(2));
    if (lin > 1e-8 * scale)
        throw Error("taylor4: expansion point is not a critical point (|grad| = " +
                    std::to_string(lin) + ")");
    for (int k = 1; k <= 4; ++k) h.c[k] = 0.0;
    return h;
}

/// Standard pair structure for the normal-form coordinates (x1,y1,x2,y2):
/// {x_j, y_j} = 1.
inline Mat4 standard_pair_structure() {
    Mat4 p = Mat4::Zero();
    p(0, 1) = 1.0;
    p(1, 0) = -1.0;
    p(2, 3) = 1.0;
    p(3, 2) = -1.0;
    return p;
}

struct LinearNormalization {
    Mat4 transform;  // old = transform * new; transform maps P_std to P_in
    double alpha1 = 0.0, alpha2 = 0.0;
};

/// Symplectic linear normalization of an elliptic quadratic Hamiltonian:
/// returns T with T P_std T^T = P_in and T^T N T = diag(a1,a1,a2,a2), so that the
/// quadratic part becomes (1/2)(a1 (x1^2+y1^2) + a2 (x2^2+y2^2)), |a_j| = Omega_j.
inline LinearNormalization linear_normalize(const Mat4& hess_n,
                                            const Mat4& p_in = standard_pair_structure()) {
    const Mat4 lin = p_in * hess_n;
    Eigen::EigenSolver<Mat4> es(lin);
    const auto ev = es.eigenvalues();
    const auto vecs = es.eigenvectors();
    double max_abs = 0.0;
    for (int i = 0; i < 4; ++i) max_abs = std::max(max_abs, std::abs(ev[i]));
    if (max_abs == 0.0) throw ResonantLinearPart("zero linearization");
    for (int i = 0; i < 4; ++i) {
        if (std::abs(ev[i].real()) > 1e-9 * max_abs)
            throw ResonantLinearPart("linear part is not elliptic");
        if (std::abs(ev[i]) < 1e-12 * max_abs)
            throw ResonantLinearPart("degenerate linear part (zero eigenvalue)");
    }
    // the two frequencies: eigenvalues with positive imaginary part
    int idx[2] = {-1, -1};
    for (int i = 0; i < 4; ++i) {
        if (ev[i].imag() <= 0.0) continue;
        if (idx[0] < 0 || ev[i].imag() < ev[idx[0]].imag()) {
            idx[1] = idx[0];
            idx[0] = i;
        } else if (idx[1] < 0 || ev[i].imag() < ev[idx[1]].imag()) {
            idx[1] = i;
        }
    }
    if (idx[0] < 0 || idx[1] < 0) throw ResonantLinearPart("missing conjugate pairs");
    const double w1 = ev[idx[0]].imag(), w2 = ev[idx[1]].imag();
    if (std::abs(w1 - w2) < 1e-8 * std::max(w1, w2))
        throw ResonantLinearPart("1:1 resonant frequencies");

    const Mat4 p_inv = p_in.inverse();
    LinearNormalization out;
    double alphas[2];
    for (int j = 0; j < 2; ++j) {
        Eigen::Vector4cd v = vecs.col(idx[j]);
        // canonical phase: largest-magnitude component made real positive
        int kmax = 0;
        for (int k = 1; k < 4; ++k)
            if (std::abs(v[k]) > std::abs(v[kmax]) + 1e-15) kmax = k;
        v *= std::conj(v[kmax]) / std::abs(v[kmax]);
        Eigen::Vector4d u = v.real(), w = v.imag();
        double s = u.dot(p_inv * w);
        if (s > 0.0) {
            w = -w;
            s = -s;
            alphas[j] = -(j == 0 ? w1 : w2);
        } else {
            alphas[j] = (j == 0 ? w1 : w2);
        }
        const double scale = std::sqrt(-s);
        u /= scale;
        w /= scale;
        out.transform.col(2 * j) = u;
        out.transform.col(2 * j + 1) = w;
    }
    out.alpha1 = alphas[0];
    out.alpha2 = alphas[1];

    // consistency of the construction
    const double n_scale = hess_n.cwiseAbs().maxCoeff();
    if ((out.transform * standard_pair_structure() * out.transform.transpose() - p_in)
            .cwiseAbs()
            .maxCoeff() > 1e-9)
        throw Error("linear_normalize: transform is not symplectic");
    Mat4 d = out.transform.transpose() * hess_n * out.transform;
    Mat4 expect = Mat4::Zero();
    expect.diagonal() << out.alpha1, out.alpha1, out.alpha2, out.alpha2;
    if ((d - expect).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, n_scale))
        throw Error("linear_normalize: quadratic part not diagonalized");
    return out;
}

inline LinearNormalization linear_normalize(const Jet4& quadratic,
                                            const Mat4& p_in = standard_pair_structure()) {
    return linear_normalize(quadratic_hessian(quadratic), p_in);
}

namespace detail {

/// {F,G} in complex coordinates (z1, zb1, z2, zb2) with {z_j, zb_j} = -2i:
///   {F,G} = -2i sum_j (F_{z_j} G_{zb_j} - F_{zb_j} G_{z_j}).
inline CPoly4 complex_bracket(const CPoly4& f, const CPoly4& g) {
    const std::complex<double> m2i(0.0, -2.0);
    CPoly4 r;
    for (int j = 0; j < 2; ++j) {
        const int zj = 2 * j, zbj = 2 * j + 1;
        r += f.derivative(zj) * g.derivative(zbj) - f.derivative(zbj) * g.derivative(zj);
    }
    return r * m2i;
}

}  // namespace detail

/// One Lie-transform step on a Hamiltonian in normalized coordinates
/// (quadratic part (1/2) sum a_j I_j): removes all cubic terms and reads the
/// resonant quartic coefficients beta_jk off the transformed degree-4 part.
/// Works in complex symplectic coordinates z_j = x_j + i y_j internally.
inline NormalForm4 birkhoff4(const Jet4& p, double alpha1, double alpha2) {
    // complexify: x_j = (z_j + zb_j)/2, y_j = -i (z_j - zb_j)/2
    Eigen::Matrix4cd to_c = Eigen::Matrix4cd::Zero();
    const std::complex<double> half(0.5, 0.0), mihalf(0.0, -0.5), ihalf(0.0, 0.5);
    to_c(0, 0) = half;
    to_c(0, 1) = half;
    to_c(1, 0) = mihalf;
    to_c(1, 1) = ihalf;
    to_c(2, 2) = half;
    to_c(2, 3) = half;
    to_c(3, 2) = mihalf;
    to_c(3, 3) = ihalf;
    const CPoly4 h = substitute_linear(complexify(p), to_c);

    const auto& tb = JetTables::get();
    const double scale2 = std::abs(alpha1) + std::abs(alpha2);

    // verify the quadratic part is (1/2)(a1 z1 zb1 + a2 z2 zb2)
    {
        CPoly4 h2 = h.graded_part(2);
        h2.c[tb.index(1, 1, 0, 0)] -= 0.5 * alpha1;
        h2.c[tb.index(0, 0, 1, 1)] -= 0.5 * alpha2;
        if (h2.max_abs() > 1e-8 * std::max(1.0, scale2))
            throw Error("birkhoff4: quadratic part is not in normal form");
    }

    const CPoly4 h3 = h.graded_part(3);
    const CPoly4 h4 = h.graded_part(4);

    // homological equation {H2, G3} = -H3: per-monomial division by i<alpha, b-a>
    CPoly4 g3;
    for (int i = tb.prefix[2]; i < tb.prefix[3]; ++i) {
        if (h3.c[i] == std::complex<double>{}) continue;
        const auto& e = tb.exps[i];  // (a1, b1, a2, b2)
        const int k1 = e[1] - e[0], k2 = e[3] - e[2];
        const double den = alpha1 * k1 + alpha2 * k2;
        if (std::abs(den) < 1e-8 * scale2) throw SmallDenominator(k1, k2);
        g3.c[i] = h3.c[i] / std::complex<double>(0.0, den);
    }

    // H4' = H4 + (1/2){H3, G3}; only the resonant (a = b) part feeds beta
    const CPoly4 h4p = h4 + detail::complex_bracket(h3, g3) * std::complex<double>(0.5, 0.0);

    const std::complex<double> c11 = h4p.c[tb.index(2, 2, 0, 0)];
    const std::complex<double> c12 = h4p.c[tb.index(1, 1, 1, 1)];
    const std::complex<double> c22 = h4p.c[tb.index(0, 0, 2, 2)];
    const double imag_resid =
        std::max({std::abs(c11.imag()), std::abs(c12.imag()), std::abs(c22.imag())});
    if (imag_resid > 1e-7 * std::max(1.0, h4.max_abs()))
        throw Error("birkhoff4: resonant coefficients are not real");

    NormalForm4 nf;
    nf.alpha1 = alpha1;
    nf.alpha2 = alpha2;
    nf.omega1 = std::abs(alpha1);
    nf.omega2 = std::abs(alpha2);
    nf.beta11 = 4.0 * c11.real();
    nf.beta12 = 2.0 * c12.real();
    nf.beta22 = 4.0 * c22.real();
    nf.arnold_d = arnold_determinant(nf);

    const double a = nf.omega1 * nf.omega1 + nf.omega2 * nf.omega2;
    const double b = nf.omega1 * nf.omega1 * nf.omega2 * nf.omega2;
    const auto r = resonance_indicators(a, b);
    const double band = resonance_band * a * a;
    nf.margin_11 = r.R1 / (a * a);
    nf.margin_21 = r.R2 / (a * a);
    nf.margin_31 = r.R3 / (a * a);
    nf.near_11 = std::abs(r.R1) < band;
    nf.near_21 = std::abs(r.R2) < band;
    nf.near_31 = std::abs(r.R3) < band;
    return nf;
}

enum class KamVerdict { NonlinearlyStable, Inconclusive };

inline const char* kam_verdict_name(KamVerdict v) {
    return v == KamVerdict::NonlinearlyStable ? "nonlinearly-stable" : "inconclusive";
}

/// KAM conclusion at an elliptic RE: stable when clear of the 2:1 and 3:1 resonance
/// bands and the Arnold determinant is away from zero; otherwise the analysis is
/// inconclusive (resonant and degenerate-twist cases are out of scope).
inline KamVerdict kam_verdict(const StabilityReport& report, const NormalForm4& nf) {
    if (report.verdict != Verdict::Elliptic)
        throw DomainError("kam_verdict requires an elliptic stability report");
    const double a = report.char_a;
    const double band = resonance_band * a * a;
    if (std::abs(report.R2) < band || std::abs(report.R3) < band) return KamVerdict::Inconclusive;
    const double dscale = std::pow(std::abs(nf.alpha1) + std::abs(nf.alpha2), 3);
    if (std::abs(nf.arnold_d) <= 1e-8 * dscale) return KamVerdict::Inconclusive;
    return KamVerdict::NonlinearlyStable;
}

struct KamAnalysis {
    StabilityReport report;
    NormalForm4 nf;
    KamVerdict verdict = KamVerdict::Inconclusive;
};

/// taylor4 -> linear normalization -> birkhoff4, without the stability report.
inline NormalForm4 normal_form_at(const RelativeEquilibrium& re, const Potential& pot) {
    const LeafChart chart = LeafChart::for_re(re);
    const Jet4 h = taylor4(chart, re, re.masses, pot);
    const LinearNormalization ln = linear_normalize(h, chart.structure_matrix());
    const Jet4 hn = substitute_linear(h, ln.transform);
    return birkhoff4(hn, ln.alpha1, ln.alpha2);
}

/// classify -> taylor4 -> linear normalization -> birkhoff4 -> kam_verdict.
inline KamAnalysis kam_pipeline(const RelativeEquilibrium& re, const Potential& pot) {
    KamAnalysis out;
    out.report = classify(re, pot);
    if (out.report.verdict != Verdict::Elliptic)
        throw DomainError("KAM analysis requires an elliptic RE (got verdict '" +
                          std::string(verdict_name(out.report.verdict)) + "')");
    out.nf = normal_form_at(re, pot);
    out.verdict = kam_verdict(out.report, out.nf);
    return out;
}

}  // namespace ctb
