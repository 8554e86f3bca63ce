#pragma once

#include <random>

#include "ctb/contour.hpp"
#include "ctb/io.hpp"
#include "ctb/normal_form.hpp"
#include "ctb/util.hpp"

namespace ctb {

struct BranchSample {
    double param;  // alpha on S^2 branches, q on L^2 branches, theta for right-angled
    double q, alpha, C, H;
    Signature sig;
    Verdict verdict;
};

struct SingularPoint {
    std::string kind;  // "cusp" or "pitchfork"
    BranchSample at;
};

struct BranchCurve {
    Family family;
    std::string param_name;
    std::vector<BranchSample> samples;
    std::vector<SingularPoint> singular;
};

struct EmDiagramOptions {
    int points_per_branch = 400;
    double l2_q_min = 0.05, l2_q_max = 4.0;
    double s2_alpha_margin = 0.02;  // branch parameter margin away from {0, pi/2}
    double s2_q_max = 2.8;          // obtuse/isosceles cap: M^2 -> inf as q -> pi
    int jobs = 1;
};

namespace detail {

inline RelativeEquilibrium branch_re(Geometry g, Family family, double param,
                                     const Masses& masses, const Potential& pot) {
    (void)g;
    switch (family) {
        case Family::EllipticL2: return solve_l2_elliptic(param, masses, pot);
        case Family::HyperbolicL2: return solve_l2_hyperbolic(param, masses, pot);
        case Family::Acute: return sphere_re_from_alpha(param, false, masses, pot);
        case Family::Obtuse: return sphere_re_from_alpha(param, true, masses, pot);
        case Family::Isosceles: return sphere_re_at(2.0 * param, param, Family::Isosceles,
                                                    masses, pot);
        case Family::RightAngled:
            return sphere_re_at(0.5 * pi, param, Family::RightAngled, masses, pot);
    }
    throw Error("unknown family");
}

inline BranchSample branch_sample(Geometry g, Family family, double param,
                                  const Masses& masses, const Potential& pot) {
    const RelativeEquilibrium re = branch_re(g, family, param, masses, pot);
    const StabilityReport rep = classify(re, pot);
    BranchSample s;
    s.param = param;
    s.q = re.q;
    s.alpha = re.alpha;
    s.C = re.m_sq;
    s.H = hamiltonian(re.state, masses, g, pot);
    s.sig = rep.sig;
    s.verdict = rep.verdict;
    return s;
}

/// Bisection for a sign change of fn over [lo,hi]; nullopt when none.
template <class F>
std::optional<double> bisect_sign_change(F&& fn, double lo, double hi) {
    double flo = fn(lo), fhi = fn(hi);
    if (!(flo * fhi < 0.0)) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = fn(mid);
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Energy-momentum bifurcation data: every RE branch of the given (geometry, mu)
/// sampled into (C, H) with signatures, plus the cusp/pitchfork markers located by
/// bisection on the degeneracy indicator f along the branch.
inline std::vector<BranchCurve> em_diagram(Geometry g, double mu, const Potential& pot,
                                           EmDiagramOptions opt = {}) {
    if (opt.points_per_branch < 100) throw DomainError("sampling density must be >= 100");
    const Masses masses = Masses::normalized(mu);
    const bool equal = std::abs(mu - 1.0) <= equal_mass_tol;

    struct Spec {
        Family family;
        std::string param_name;
        double lo, hi;
    };
    std::vector<Spec> specs;
    if (!g.is_sphere()) {
        specs.push_back({Family::EllipticL2, "q", opt.l2_q_min, opt.l2_q_max});
        specs.push_back({Family::HyperbolicL2, "q", opt.l2_q_min, opt.l2_q_max});
    } else if (equal) {
        specs.push_back({Family::Isosceles, "alpha", opt.s2_alpha_margin,
                         std::min(0.5 * pi - opt.s2_alpha_margin, 0.5 * opt.s2_q_max)});
        specs.push_back({Family::RightAngled, "theta", opt.s2_alpha_margin,
                         0.5 * pi - opt.s2_alpha_margin});
    } else {
        specs.push_back({Family::Acute, "alpha", opt.s2_alpha_margin,
                         0.5 * pi - opt.s2_alpha_margin});
        double hi = 0.5 * pi - opt.s2_alpha_margin;
        if (auto cap = solve_sphere(std::min(opt.s2_q_max, pi - 1e-3), masses, pot))
            hi = std::min(hi, cap->alpha);
        specs.push_back({Family::Obtuse, "alpha", opt.s2_alpha_margin, hi});
    }

    std::vector<BranchCurve> out(specs.size());
    for (std::size_t b = 0; b < specs.size(); ++b) {
        const auto& sp = specs[b];
        BranchCurve& curve = out[b];
        curve.family = sp.family;
        curve.param_name = sp.param_name;
        curve.samples.resize(opt.points_per_branch);
        const auto grid = linspace(sp.lo, sp.hi, opt.points_per_branch);
        parallel_for(opt.points_per_branch, opt.jobs, [&](int i) {
            curve.samples[i] = detail::branch_sample(g, sp.family, grid[i], masses, pot);
        });

        auto f_along = [&](double param) {
            return f_indicator(detail::branch_re(g, sp.family, param, masses, pot));
        };
        if (sp.family == Family::RightAngled) {
            // f = cos^2(2 theta) touches zero without a sign change; locate the
            // pitchfork through its signed square root instead
            auto root = detail::bisect_sign_change(
                [](double th) { return std::cos(2.0 * th); }, sp.lo, sp.hi);
            if (root)
                curve.singular.push_back(
                    {"pitchfork", detail::branch_sample(g, sp.family, *root, masses, pot)});
        } else if (auto root = detail::bisect_sign_change(f_along, sp.lo, sp.hi)) {
            const char* kind = (sp.family == Family::Isosceles) ? "pitchfork" : "cusp";
            curve.singular.push_back(
                {kind, detail::branch_sample(g, sp.family, *root, masses, pot)});
        }
    }
    return out;
}

/// q*(mu) polyline delimiting the stable region. mu_grid should be
/// log-spaced for L^2 (any mu > 0); restricted to (0,1) on S^2.
inline std::vector<std::pair<double, double>> stability_region(
    const std::vector<double>& mu_grid, Geometry g) {
    std::vector<std::pair<double, double>> out;
    out.reserve(mu_grid.size());
    for (double mu : mu_grid) out.emplace_back(mu, critical_angle(mu, g).q_star);
    return out;
}

/// Monte-Carlo scatter of admissible (C, H) pairs from seeded random states;
/// illustrates the shaded region of the energy-momentum diagrams.
inline std::vector<std::pair<double, double>> admissible_scatter(Geometry g,
                                                                 const Masses& masses,
                                                                 const Potential& pot, int n,
                                                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> qdist(0.15, g.is_sphere() ? pi - 0.15 : 3.5);
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        ReducedState s;
        s.m = Vec3(gauss(rng), gauss(rng), gauss(rng));
        s.q = qdist(rng);
        s.p = gauss(rng);
        out.emplace_back(casimir(s.m, g), hamiltonian(s, masses, g, pot));
    }
    return out;
}

// ---------------------------------------------------------------------------
// fig10: zero loci of R2, R3 and the Arnold determinant on the (mu, alpha)
// rectangle of acute RE, q = q_-(alpha)
// ---------------------------------------------------------------------------

struct Fig10Grid {
    std::vector<double> mu, alpha;
    Eigen::MatrixXd r2, r3, d;  // mu.size() rows x alpha.size() cols
    GridMask d_ok;              // D is skipped where the normal form breaks down
};

/// R2, R3 from the closed forms and the Arnold determinant D from the full normal-form
/// pipeline, over a (mu, alpha) grid of acute RE.
inline Fig10Grid fig10_grid(const std::vector<double>& mu_grid,
                            const std::vector<double>& alpha_grid, int jobs = 1) {
    Fig10Grid grid;
    grid.mu = mu_grid;
    grid.alpha = alpha_grid;
    const int nm = static_cast<int>(mu_grid.size()), na = static_cast<int>(alpha_grid.size());
    grid.r2.resize(nm, na);
    grid.r3.resize(nm, na);
    grid.d.resize(nm, na);
    grid.d_ok.setOnes(nm, na);

    parallel_for(nm, jobs, [&](int i) {
        const double mu = mu_grid[i];
        const Masses masses = Masses::normalized(mu);
        const Potential pot = normalized_gravitational(Geometry::sphere());
        for (int j = 0; j < na; ++j) {
            const RelativeEquilibrium re = sphere_re_from_alpha(alpha_grid[j], false, masses, pot);
            const Mat4 hess = hessian_at_re(re);
            const auto [a, b] = char_coeffs(re, hess);
            const auto r = resonance_indicators(a, b);
            grid.r2(i, j) = r.R2;
            grid.r3(i, j) = r.R3;
            try {
                grid.d(i, j) = normal_form_at(re, pot).arnold_d;
            } catch (const Error&) {
                grid.d(i, j) = std::numeric_limits<double>::quiet_NaN();
                grid.d_ok(i, j) = 0;
            }
        }
    });
    return grid;
}

struct Fig10Curves {
    std::vector<Polyline> r2_zero, r3_zero, d_zero;
};

namespace detail {

/// Join polylines whose endpoints fall within `tol`; the D contour gets cut by the
/// excluded resonance cells and the pieces are stitched back here.
inline std::vector<Polyline> stitch_polylines(std::vector<Polyline> lines, double tol) {
    auto d2 = [](std::pair<double, double> a, std::pair<double, double> b) {
        const double dx = a.first - b.first, dy = a.second - b.second;
        return dx * dx + dy * dy;
    };
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < lines.size() && !merged; ++i)
            for (std::size_t j = i + 1; j < lines.size() && !merged; ++j) {
                auto& a = lines[i].pts;
                auto& b = lines[j].pts;
                const double t2 = tol * tol;
                if (d2(a.back(), b.front()) <= t2) {
                    a.insert(a.end(), b.begin(), b.end());
                } else if (d2(a.back(), b.back()) <= t2) {
                    a.insert(a.end(), b.rbegin(), b.rend());
                } else if (d2(a.front(), b.back()) <= t2) {
                    a.insert(a.begin(), b.begin(), b.end());
                } else if (d2(a.front(), b.front()) <= t2) {
                    a.insert(a.begin(), b.rbegin(), b.rend());
                } else {
                    continue;
                }
                lines.erase(lines.begin() + j);
                merged = true;
            }
    }
    return lines;
}

}  // namespace detail

/// Zero loci of R2, R3 and D. The normal form has poles (not zeros) across the
/// resonance curves, so cells straddling a sign change of R2 or R3 are excluded
/// from the D contour.
inline Fig10Curves fig10_curves(const Fig10Grid& grid) {
    Fig10Curves c;
    c.r2_zero = zero_contours(grid.mu, grid.alpha, grid.r2);
    c.r3_zero = zero_contours(grid.mu, grid.alpha, grid.r3);
    const int nm = static_cast<int>(grid.mu.size()), na = static_cast<int>(grid.alpha.size());
    GridMask mask = grid.d_ok;
    for (int i = 0; i + 1 < nm; ++i)
        for (int j = 0; j + 1 < na; ++j) {
            auto flips = [&](const Eigen::MatrixXd& f) {
                const bool s = f(i, j) < 0.0;
                return (f(i + 1, j) < 0.0) != s || (f(i, j + 1) < 0.0) != s ||
                       (f(i + 1, j + 1) < 0.0) != s;
            };
            if (flips(grid.r2) || flips(grid.r3)) {
                mask(i, j) = mask(i + 1, j) = mask(i, j + 1) = mask(i + 1, j + 1) = 0;
            }
        }
    c.d_zero = zero_contours(grid.mu, grid.alpha, grid.d, &mask);
    const double dx = grid.mu.size() > 1 ? grid.mu[1] - grid.mu[0] : 1.0;
    const double dy = grid.alpha.size() > 1 ? grid.alpha[1] - grid.alpha[0] : 1.0;
    c.d_zero = detail::stitch_polylines(std::move(c.d_zero), 4.0 * std::max(dx, dy));
    return c;
}

inline Fig10Curves fig10_curves(const std::vector<double>& mu_grid,
                                const std::vector<double>& alpha_grid, int jobs = 1) {
    return fig10_curves(fig10_grid(mu_grid, alpha_grid, jobs));
}

// ---------------------------------------------------------------------------
// CSV / SVG emission
// ---------------------------------------------------------------------------

inline void branch_csv(std::ostream& os, const std::vector<BranchCurve>& curves) {
    CsvWriter csv(os);
    csv.header({"family", "param", "q", "alpha", "C", "H", "n_plus", "n_minus", "n_zero",
                "verdict"});
    for (const auto& curve : curves)
        for (const auto& s : curve.samples)
            csv.row()
                .text(family_name(curve.family))
                .num(s.param)
                .num(s.q)
                .num(s.alpha)
                .num(s.C)
                .num(s.H)
                .integer(s.sig.n_plus)
                .integer(s.sig.n_minus)
                .integer(s.sig.n_zero)
                .text(verdict_name(s.verdict));
}

inline void singular_csv(std::ostream& os, const std::vector<BranchCurve>& curves) {
    CsvWriter csv(os);
    csv.header({"family", "kind", "param", "q", "alpha", "C", "H"});
    for (const auto& curve : curves)
        for (const auto& sp : curve.singular)
            csv.row()
                .text(family_name(curve.family))
                .text(sp.kind)
                .num(sp.at.param)
                .num(sp.at.q)
                .num(sp.at.alpha)
                .num(sp.at.C)
                .num(sp.at.H);
}

inline void region_csv(std::ostream& os, const std::vector<std::pair<double, double>>& region) {
    CsvWriter csv(os);
    csv.header({"mu", "q_star"});
    for (auto [mu, q] : region) csv.row().num(mu).num(q);
}

inline void polylines_csv(std::ostream& os, const std::vector<Polyline>& lines,
                          const std::string& xname, const std::string& yname) {
    CsvWriter csv(os);
    csv.header({"component", xname, yname});
    for (std::size_t k = 0; k < lines.size(); ++k)
        for (auto [x, y] : lines[k].pts)
            csv.row().integer(static_cast<long>(k)).num(x).num(y);
}

inline void scatter_csv(std::ostream& os, const std::vector<std::pair<double, double>>& pts) {
    CsvWriter csv(os);
    csv.header({"C", "H"});
    for (auto [c, h] : pts) csv.row().num(c).num(h);
}

inline std::string em_diagram_svg(const std::vector<BranchCurve>& curves,
                                  const std::vector<std::pair<double, double>>& scatter = {}) {
    std::vector<SvgSeries> series;
    if (!scatter.empty()) {
        SvgSeries sc;
        sc.points = scatter;
        sc.color = "#cccccc";
        sc.markers = true;
        series.push_back(std::move(sc));
    }
    const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};
    int k = 0;
    for (const auto& curve : curves) {
        SvgSeries s;
        s.color = colors[k++ % 4];
        for (const auto& smp : curve.samples) s.points.emplace_back(smp.C, smp.H);
        series.push_back(std::move(s));
        for (const auto& sp : curve.singular) {
            SvgSeries m;
            m.color = "#000000";
            m.markers = true;
            m.points.emplace_back(sp.at.C, sp.at.H);
            series.push_back(std::move(m));
        }
    }
    return svg_plot(series, "C", "H");
}

inline std::string region_svg(const std::vector<std::pair<double, double>>& region,
                              bool log_mu) {
    SvgSeries s;
    for (auto [mu, q] : region) s.points.emplace_back(q, log_mu ? std::log10(mu) : mu);
    return svg_plot({s}, "q*", log_mu ? "log10 mu" : "mu");
}

inline std::string fig10_svg(const Fig10Curves& c) {
    std::vector<SvgSeries> series;
    const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c"};
    const std::vector<Polyline>* groups[] = {&c.r2_zero, &c.r3_zero, &c.d_zero};
    for (int k = 0; k < 3; ++k)
        for (const auto& pl : *groups[k]) {
            SvgSeries s;
            s.color = colors[k];
            s.points = pl.pts;
            series.push_back(std::move(s));
        }
    return svg_plot(series, "mu", "alpha");
}

}  // namespace ctb
