// ctb: two-body problem on constant-curvature surfaces.
// Relative equilibria, stability, Birkhoff/KAM analysis, reduced-flow integration,
// ambient reconstruction and bifurcation diagrams, on S^2 and the Lobachevsky plane.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <ctb/diagrams.hpp>
#include <ctb/reconstruct.hpp>

namespace fs = std::filesystem;
using namespace ctb;

namespace {

struct Setup {
    std::string geometry = "l2";
    double mu = 1.0;   // mass ratio; mu1 = 1, mu2 = 1/mu, k = 1 unless overridden
    double mu1 = 0.0;  // explicit masses (both must be set together)
    double mu2 = 0.0;
    double k = 1.0;

    Geometry geom() const {
        if (geometry == "s2") return Geometry::sphere();
        if (geometry == "l2") return Geometry::lobachevsky();
        throw DomainError("--geometry must be s2 or l2");
    }
    Masses masses() const {
        if (mu1 > 0.0 || mu2 > 0.0) {
            if (!(mu1 > 0.0 && mu2 > 0.0))
                throw DomainError("--mu1 and --mu2 must be given together");
            return Masses(mu1, mu2);
        }
        if (!(mu > 0.0)) throw DomainError("--mu must be positive");
        return Masses::normalized(mu);
    }
    Potential pot() const { return gravitational(geom(), k); }
};

void add_setup(CLI::App* cmd, Setup& s) {
    cmd->add_option("--geometry", s.geometry, "surface: s2 or l2")
        ->check(CLI::IsMember({"s2", "l2"}));
    cmd->add_option("--mu", s.mu, "mass ratio mu1/mu2 (normalized setup)");
    cmd->add_option("--mu1", s.mu1, "explicit mass mu1");
    cmd->add_option("--mu2", s.mu2, "explicit mass mu2");
    cmd->add_option("--k", s.k, "gravitational coupling G*mu1*mu2");
}

std::ostream& out_stream(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw Error("cannot open " + path);
    return file;
}

std::string re_json(const RelativeEquilibrium& re) {
    JsonRecord r;
    r.str("geometry", re.geometry.name())
        .str("family", family_name(re.family))
        .num("q", re.q)
        .num("alpha", re.alpha)
        .num("M2", re.M0 * re.M0)
        .num("omega", re.omega)
        .num("C", re.m_sq)
        .num("residual", re.residual);
    return r.str();
}

std::string no_solution_json(Geometry g, double q) {
    JsonRecord r;
    r.str("geometry", g.name()).str("result", "no-solution").num("q", q).str(
        "reason", "no RE at q = pi/2 for unequal masses");
    return r.str();
}

std::string signature_string(const Signature& s) {
    return std::string(s.n_plus, '+') + std::string(s.n_minus, '-') +
           std::string(s.n_zero, '0');
}

std::string report_json(const StabilityReport& rep) {
    JsonRecord r;
    r.str("family", family_name(rep.family))
        .num("q", rep.q)
        .num("alpha", rep.alpha)
        .num("M2", rep.M0 * rep.M0)
        .str("signature", signature_string(rep.sig))
        .num("a", rep.char_a)
        .num("b", rep.char_b)
        .num("f", rep.f)
        .num("R1", rep.R1)
        .num("R2", rep.R2)
        .num("R3", rep.R3);
    std::vector<double> ev_re, ev_im;
    for (const auto& l : rep.eigenvalues) {
        ev_re.push_back(l.real());
        ev_im.push_back(l.imag());
    }
    r.num_array("eigenvalues_re", ev_re)
        .num_array("eigenvalues_im", ev_im)
        .str("verdict", verdict_name(rep.verdict));
    return r.str();
}

std::vector<RelativeEquilibrium> find_res(const Setup& setup, double q, double theta,
                                          bool* no_solution) {
    const Geometry g = setup.geom();
    const Masses masses = setup.masses();
    const Potential pot = setup.pot();
    *no_solution = false;
    if (!g.is_sphere()) return solve_l2_both(q, masses, pot);
    if (theta > 0.0) return {solve_sphere_right_angled(theta, masses, pot)};
    auto re = solve_sphere(q, masses, pot);
    if (!re) {
        *no_solution = true;
        return {};
    }
    return {*re};
}

int run(int argc, char** argv) {
    CLI::App app{"two-body problem on surfaces of constant curvature"};
    app.set_config("--config", "", "INI-style config file; flags override its values");
    app.require_subcommand(1);

    // ---- simulate ----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "integrate the reduced equations, emit CSV");
    Setup sim_setup;
    add_setup(sim, sim_setup);
    double sim_mx = 0.0, sim_my = 0.0, sim_mz = 1.0, sim_q = 1.0, sim_p = 0.0;
    double sim_tend = 10.0, sim_tol = 1e-10;
    int sim_samples = 201;
    std::string sim_out;
    sim->add_option("--mx", sim_mx, "initial m_x");
    sim->add_option("--my", sim_my, "initial m_y");
    sim->add_option("--mz", sim_mz, "initial m_z");
    sim->add_option("--q", sim_q, "initial separation");
    sim->add_option("--p", sim_p, "initial momentum p");
    sim->add_option("--t-end", sim_tend, "integration horizon (may be negative)");
    sim->add_option("--tol", sim_tol, "per-step local error tolerance");
    sim->add_option("--samples", sim_samples, "number of output samples");
    sim->add_option("-o,--out", sim_out, "output CSV path (default stdout)");

    // ---- find-re -----------------------------------------------------------
    auto* fre = app.add_subcommand("find-re", "solve the RE conditions, one JSON per RE");
    Setup fre_setup;
    add_setup(fre, fre_setup);
    double fre_q = 1.0, fre_theta = -1.0;
    std::string fre_out;
    fre->add_option("--q", fre_q, "separation");
    fre->add_option("--theta", fre_theta, "axis angle for the equal-mass right-angled RE");
    fre->add_option("-o,--out", fre_out, "output path (default stdout)");

    // ---- stability ---------------------------------------------------------
    auto* stab = app.add_subcommand("stability", "leaf stability report as JSON");
    Setup stab_setup;
    add_setup(stab, stab_setup);
    double stab_q = 1.0, stab_theta = -1.0;
    std::string stab_out;
    stab->add_option("--q", stab_q, "separation");
    stab->add_option("--theta", stab_theta, "axis angle for the right-angled family");
    stab->add_option("-o,--out", stab_out, "output path (default stdout)");

    // ---- kam ---------------------------------------------------------------
    auto* kam = app.add_subcommand("kam", "Birkhoff normal form + KAM verdict as JSON");
    Setup kam_setup;
    kam_setup.geometry = "s2";
    add_setup(kam, kam_setup);
    double kam_q = 1.0, kam_theta = -1.0;
    std::string kam_out;
    kam->add_option("--q", kam_q, "separation");
    kam->add_option("--theta", kam_theta, "axis angle for the right-angled family");
    kam->add_option("-o,--out", kam_out, "output path (default stdout)");

    // ---- sweep -------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "classify RE over a (mu,q) grid, emit CSV");
    Setup sweep_setup;
    add_setup(sweep, sweep_setup);
    double sw_mu_min = 0.2, sw_mu_max = 0.95, sw_q_min = 0.3, sw_q_max = 2.6;
    int sw_mu_steps = 10, sw_q_steps = 30, sw_jobs = 1;
    std::string sw_out;
    sweep->add_option("--mu-min", sw_mu_min, "smallest mass ratio");
    sweep->add_option("--mu-max", sw_mu_max, "largest mass ratio");
    sweep->add_option("--mu-steps", sw_mu_steps, "mass-ratio grid size");
    sweep->add_option("--q-min", sw_q_min, "smallest separation");
    sweep->add_option("--q-max", sw_q_max, "largest separation");
    sweep->add_option("--q-steps", sw_q_steps, "separation grid size");
    sweep->add_option("--jobs", sw_jobs, "worker threads");
    sweep->add_option("-o,--out", sw_out, "output CSV path (default stdout)");

    // ---- diagram -----------------------------------------------------------
    auto* dia = app.add_subcommand("diagram", "energy-momentum bifurcation diagram files");
    Setup dia_setup;
    add_setup(dia, dia_setup);
    std::string dia_out = ".";
    int dia_points = 400, dia_scatter = 0, dia_jobs = 1;
    bool dia_region = false;
    std::uint64_t dia_seed = 20240101;
    dia->add_option("-o,--out", dia_out, "output directory")->required();
    dia->add_option("--points", dia_points, "samples per branch (>= 100)");
    dia->add_flag("--region", dia_region, "also emit the q*(mu) stability region");
    dia->add_option("--scatter", dia_scatter, "admissible (C,H) Monte-Carlo points");
    dia->add_option("--seed", dia_seed, "scatter RNG seed");
    dia->add_option("--jobs", dia_jobs, "worker threads");

    // ---- fig10 -------------------------------------------------------------
    auto* f10 =
        app.add_subcommand("fig10", "zero loci of R2, R3 and D on the (mu,alpha) plane");
    std::string f10_out = ".";
    int f10_nmu = 200, f10_nalpha = 200, f10_jobs = 1;
    f10->add_option("-o,--out", f10_out, "output directory")->required();
    f10->add_option("--nmu", f10_nmu, "grid points in mu");
    f10->add_option("--nalpha", f10_nalpha, "grid points in alpha");
    f10->add_option("--jobs", f10_jobs, "worker threads");

    // ---- reconstruct -------------------------------------------------------
    auto* rec =
        app.add_subcommand("reconstruct", "lift a reduced trajectory to the ambient space");
    Setup rec_setup;
    add_setup(rec, rec_setup);
    std::string rec_family = "auto", rec_chart = "auto", rec_out, rec_svg;
    double rec_q = 1.0, rec_theta = -1.0, rec_tend = 10.0, rec_tol = 1e-10;
    double rec_mx = 0.0, rec_my = 0.0, rec_mz = 0.0, rec_p = 0.0;
    bool rec_state_mode = false;
    int rec_samples = 201;
    rec->add_option("--family", rec_family,
                    "RE start: auto|elliptic|hyperbolic|right-angled (else --state)")
        ->check(CLI::IsMember({"auto", "elliptic", "hyperbolic", "right-angled"}));
    rec->add_flag("--state", rec_state_mode, "start from an explicit reduced state");
    rec->add_option("--q", rec_q, "separation");
    rec->add_option("--theta", rec_theta, "axis angle (right-angled family)");
    rec->add_option("--mx", rec_mx, "initial m_x (with --state)");
    rec->add_option("--my", rec_my, "initial m_y (with --state)");
    rec->add_option("--mz", rec_mz, "initial m_z (with --state)");
    rec->add_option("--p", rec_p, "initial p (with --state)");
    rec->add_option("--chart", rec_chart, "s2|l2-elliptic|l2-hyperbolic|auto")
        ->check(CLI::IsMember({"auto", "s2", "l2-elliptic", "l2-hyperbolic"}));
    rec->add_option("--t-end", rec_tend, "horizon");
    rec->add_option("--tol", rec_tol, "integration tolerance");
    rec->add_option("--samples", rec_samples, "number of output samples");
    rec->add_option("-o,--out", rec_out, "output CSV path (default stdout)");
    rec->add_option("--svg", rec_svg, "optional SVG of the projected paths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (sim->parsed()) {
        const Geometry g = sim_setup.geom();
        ReducedState s0;
        s0.m = Vec3(sim_mx, sim_my, sim_mz);
        s0.q = sim_q;
        s0.p = sim_p;
        auto traj = integrate(s0, sim_tend, sim_tol, sim_setup.masses(), g, sim_setup.pot(),
                              {.samples = sim_samples});
        std::ofstream file;
        trajectory_csv(out_stream(sim_out, file), traj, sim_setup.masses(), g,
                       sim_setup.pot());
        return 0;
    }

    if (fre->parsed()) {
        bool none = false;
        auto res = find_res(fre_setup, fre_q, fre_theta, &none);
        std::ofstream file;
        auto& os = out_stream(fre_out, file);
        if (none)
            os << no_solution_json(fre_setup.geom(), fre_q) << "\n";
        else
            for (const auto& re : res) os << re_json(re) << "\n";
        return 0;
    }

    if (stab->parsed()) {
        bool none = false;
        auto res = find_res(stab_setup, stab_q, stab_theta, &none);
        std::ofstream file;
        auto& os = out_stream(stab_out, file);
        if (none)
            os << no_solution_json(stab_setup.geom(), stab_q) << "\n";
        else
            for (const auto& re : res)
                os << report_json(classify(re, stab_setup.pot())) << "\n";
        return 0;
    }

    if (kam->parsed()) {
        bool none = false;
        auto res = find_res(kam_setup, kam_q, kam_theta, &none);
        if (none || res.empty()) throw DomainError("no RE at the requested parameters");
        // on L^2 the elliptic-family RE is the one with a chance of a KAM verdict
        const RelativeEquilibrium& re = res.front();
        auto analysis = kam_pipeline(re, kam_setup.pot());
        JsonRecord r;
        r.str("geometry", re.geometry.name())
            .str("family", family_name(re.family))
            .num("q", re.q)
            .num("alpha", re.alpha)
            .num("omega1", analysis.nf.omega1)
            .num("omega2", analysis.nf.omega2)
            .num("alpha1", analysis.nf.alpha1)
            .num("alpha2", analysis.nf.alpha2)
            .num("beta11", analysis.nf.beta11)
            .num("beta12", analysis.nf.beta12)
            .num("beta22", analysis.nf.beta22)
            .num("D", analysis.nf.arnold_d)
            .boolean("near_21", analysis.nf.near_21)
            .boolean("near_31", analysis.nf.near_31)
            .num("R2", analysis.report.R2)
            .num("R3", analysis.report.R3)
            .str("verdict", kam_verdict_name(analysis.verdict));
        std::ofstream file;
        out_stream(kam_out, file) << r.str() << "\n";
        return 0;
    }

    if (sweep->parsed()) {
        const Geometry g = sweep_setup.geom();
        const Potential pot = sweep_setup.pot();
        const auto mu_grid = linspace(sw_mu_min, sw_mu_max, sw_mu_steps);
        const auto q_grid = linspace(sw_q_min, sw_q_max, sw_q_steps);
        struct Row {
            double mu, q;
            Family family;
            StabilityReport rep;
            bool present = false;
        };
        const std::size_t per_q = g.is_sphere() ? 1 : 2;
        std::vector<Row> rows(mu_grid.size() * q_grid.size() * per_q);
        parallel_for(static_cast<int>(mu_grid.size()), sw_jobs, [&](int i) {
            const Masses masses = Masses::normalized(mu_grid[i]);
            for (std::size_t j = 0; j < q_grid.size(); ++j) {
                const double q = q_grid[j];
                std::vector<RelativeEquilibrium> res;
                if (g.is_sphere()) {
                    auto re = solve_sphere(q, masses, pot);
                    if (re) res.push_back(*re);
                } else {
                    res = solve_l2_both(q, masses, pot);
                }
                for (std::size_t k = 0; k < res.size(); ++k) {
                    Row& row = rows[(i * q_grid.size() + j) * per_q + k];
                    row.mu = mu_grid[i];
                    row.q = q;
                    row.family = res[k].family;
                    row.rep = classify(res[k], pot);
                    row.present = true;
                }
            }
        });
        std::ofstream file;
        auto& os = out_stream(sw_out, file);
        CsvWriter csv(os);
        csv.header(
            {"mu", "q", "family", "signature", "verdict", "a", "b", "f", "R1", "R2", "R3"});
        for (const auto& row : rows) {
            if (!row.present) continue;
            csv.row()
                .num(row.mu)
                .num(row.q)
                .text(family_name(row.family))
                .text(signature_string(row.rep.sig))
                .text(verdict_name(row.rep.verdict))
                .num(row.rep.char_a)
                .num(row.rep.char_b)
                .num(row.rep.f)
                .num(row.rep.R1)
                .num(row.rep.R2)
                .num(row.rep.R3);
        }
        return 0;
    }

    if (dia->parsed()) {
        fs::create_directories(dia_out);
        const Geometry g = dia_setup.geom();
        const Potential pot = dia_setup.pot();
        auto curves = em_diagram(g, dia_setup.masses().mu(), pot,
                                 {.points_per_branch = dia_points, .jobs = dia_jobs});
        {
            std::ofstream f(fs::path(dia_out) / "branches.csv", std::ios::binary);
            branch_csv(f, curves);
        }
        {
            std::ofstream f(fs::path(dia_out) / "singular_points.csv", std::ios::binary);
            singular_csv(f, curves);
        }
        std::vector<std::pair<double, double>> scatter;
        if (dia_scatter > 0) {
            scatter = admissible_scatter(g, dia_setup.masses(), pot, dia_scatter, dia_seed);
            std::ofstream f(fs::path(dia_out) / "scatter.csv", std::ios::binary);
            scatter_csv(f, scatter);
        }
        write_file((fs::path(dia_out) / "em_diagram.svg").string(),
                   em_diagram_svg(curves, scatter));
        if (dia_region) {
            auto mu_grid =
                g.is_sphere() ? linspace(0.05, 0.999, 120) : logspace(0.05, 20.0, 120);
            auto region = stability_region(mu_grid, g);
            std::ofstream f(fs::path(dia_out) / "region.csv", std::ios::binary);
            region_csv(f, region);
            write_file((fs::path(dia_out) / "region.svg").string(),
                       region_svg(region, !g.is_sphere()));
        }
        return 0;
    }

    if (f10->parsed()) {
        fs::create_directories(f10_out);
        auto grid = fig10_grid(linspace(0.0025, 0.9975, f10_nmu),
                               linspace(0.0025, pi / 2 - 0.0025, f10_nalpha), f10_jobs);
        auto curves = fig10_curves(grid);
        auto dump = [&](const char* name, const std::vector<Polyline>& lines) {
            std::ofstream f(fs::path(f10_out) / name, std::ios::binary);
            polylines_csv(f, lines, "mu", "alpha");
        };
        dump("r2_zero.csv", curves.r2_zero);
        dump("r3_zero.csv", curves.r3_zero);
        dump("d_zero.csv", curves.d_zero);
        write_file((fs::path(f10_out) / "fig10.svg").string(), fig10_svg(curves));
        return 0;
    }

    if (rec->parsed()) {
        const Geometry g = rec_setup.geom();
        const Masses masses = rec_setup.masses();
        const Potential pot = rec_setup.pot();
        ReducedState s0;
        if (rec_state_mode) {
            s0.m = Vec3(rec_mx, rec_my, rec_mz);
            s0.q = rec_q;
            s0.p = rec_p;
        } else if (!g.is_sphere() && rec_family == "hyperbolic") {
            s0 = solve_l2_hyperbolic(rec_q, masses, pot).state;
        } else if (!g.is_sphere()) {
            s0 = solve_l2_elliptic(rec_q, masses, pot).state;
        } else if (rec_family == "right-angled" || rec_theta > 0.0) {
            s0 = solve_sphere_right_angled(rec_theta, masses, pot).state;
        } else {
            auto re = solve_sphere(rec_q, masses, pot);
            if (!re) throw DomainError("no RE at the requested separation");
            s0 = re->state;
        }
        auto traj = integrate(s0, rec_tend, rec_tol, masses, g, pot, {.samples = rec_samples});
        ReconChart chart;
        if (rec_chart == "s2")
            chart = ReconChart::Sphere;
        else if (rec_chart == "l2-elliptic")
            chart = ReconChart::L2Elliptic;
        else if (rec_chart == "l2-hyperbolic")
            chart = ReconChart::L2Hyperbolic;
        else if (g.is_sphere())
            chart = ReconChart::Sphere;
        else
            chart = casimir(s0.m, g) > 0.0 ? ReconChart::L2Elliptic : ReconChart::L2Hyperbolic;
        auto amb = reconstruct(traj, masses, pot, chart, rec_tol);
        std::ofstream file;
        ambient_csv(out_stream(rec_out, file), amb);
        if (!rec_svg.empty()) write_file(rec_svg, ambient_svg(amb));
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnequalMasses& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
