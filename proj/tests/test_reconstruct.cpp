#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ctb/reconstruct.hpp>
#include <sstream>

using namespace ctb;

namespace {

double wrap_2pi(double a) { return a - 2.0 * pi * std::round(a / (2.0 * pi)); }

double separation(const AmbientTrajectory& amb, std::size_t i) {
    if (amb.geometry.is_sphere())
        return std::acos(std::clamp(amb.R1[i].dot(amb.R2[i]), -1.0, 1.0));
    const double d = -(amb.R1[i].dot(amb.geometry.K() * amb.R2[i]));
    return std::acosh(std::max(d, 1.0));
}

}  // namespace

TEST_CASE("sphere RE reconstructs to a uniform rotation") {
    Masses masses = Masses::normalized(1.0);
    auto pot = normalized_gravitational(Geometry::sphere());
    auto re = *solve_sphere(pi / 3, masses, pot);
    auto traj = integrate(re.state, 15.0, 1e-11, masses, Geometry::sphere(), pot,
                          {.samples = 151});
    auto amb = reconstruct_sphere(traj, masses, pot, 1e-11);

    // theta, phi constant; psi varies uniformly at the RE angular speed
    for (std::size_t i = 0; i < amb.times.size(); ++i) {
        CHECK(std::abs(amb.angles[i][0] - amb.angles[0][0]) < 1e-9);
        CHECK(std::abs(amb.angles[i][1] - amb.angles[0][1]) < 1e-9);
        CHECK(std::abs(separation(amb, i) - re.q) < 1e-10);
    }
    const double slope =
        (amb.angles.back()[2] - amb.angles.front()[2]) / (amb.times.back() - amb.times.front());
    CHECK(std::abs(slope) == doctest::Approx(angular_speed(re, pot)).epsilon(1e-10));
    CHECK(slope > 0.0);  // acute representative rotates positively

    CHECK(amb.constraint_drift < 1e-10);
    CHECK(amb.momentum_drift < 1e-9);
    CHECK(amb.energy_drift < 1e-9);
    CHECK(group_orbit_residual(amb) < 1e-8);
}

TEST_CASE("generic sphere trajectory stays consistent with the reduction") {
    Masses masses = Masses::normalized(0.7);
    auto pot = normalized_gravitational(Geometry::sphere());
    ReducedState s0;
    s0.m = Vec3(0.15, 0.8, 0.45);
    s0.q = 1.1;
    s0.p = 0.12;
    auto traj = integrate(s0, 12.0, 1e-11, masses, Geometry::sphere(), pot, {.samples = 121});
    auto amb = reconstruct_sphere(traj, masses, pot, 1e-11);
    CHECK(amb.constraint_drift < 1e-10);
    CHECK(amb.momentum_drift < 1e-9);
    CHECK(amb.energy_drift < 1e-9);
    CHECK(amb.frame_drift < 1e-10);
    for (std::size_t i = 0; i < amb.times.size(); i += 10)
        CHECK(std::abs(separation(amb, i) - traj.states[i].q) < 1e-10);
}

TEST_CASE("L2 elliptic RE: phi = pi, theta = alpha, uniform psi") {
    Masses masses = Masses::normalized(1.0);
    auto pot = normalized_gravitational(Geometry::lobachevsky());
    auto re = solve_l2_elliptic(1.0, masses, pot);
    const double period = 2.0 * pi / re.omega;
    auto traj = integrate(re.state, 10.0 * period, 1e-11, masses, Geometry::lobachevsky(), pot,
                          {.samples = 201});
    auto amb = reconstruct_l2_elliptic(traj, masses, pot, 1e-11);

    CHECK(std::abs(amb.angles[0][0] - re.alpha) < 1e-12);              // theta = alpha
    CHECK(std::abs(wrap_2pi(amb.angles[0][1] - pi)) < 1e-12);          // phi = pi
    for (std::size_t i = 0; i < amb.times.size(); ++i) {
        CHECK(std::abs(amb.angles[i][0] - amb.angles[0][0]) < 1e-8);
        CHECK(std::abs(amb.angles[i][1] - amb.angles[0][1]) < 1e-8);
    }
    const double slope =
        (amb.angles.back()[2] - amb.angles.front()[2]) / (amb.times.back() - amb.times.front());
    CHECK(slope * slope == doctest::Approx(re.omega * re.omega).epsilon(1e-9));

    // mu1 stays at hyperbolic distance alpha from the centre of mass (0,0,1)
    const Vec3 centre(0.0, 0.0, 1.0);
    for (std::size_t i = 0; i < amb.times.size(); i += 20) {
        const double d = std::acosh(-amb.R1[i].dot(amb.geometry.K() * centre));
        CHECK(std::abs(d - re.alpha) < 1e-10);
    }
    CHECK(amb.constraint_drift < 1e-10);
    CHECK(amb.momentum_drift < 1e-9);
    CHECK(amb.energy_drift < 1e-9);
    CHECK(group_orbit_residual(amb) < 1e-8);
}

TEST_CASE("L2 hyperbolic RE: theta = -alpha, psi = 3pi/2, unbounded cosh growth") {
    Masses masses = Masses::normalized(1.0);
    auto pot = normalized_gravitational(Geometry::lobachevsky());
    auto re = solve_l2_hyperbolic(1.0, masses, pot);
    auto traj = integrate(re.state, 3.0, 1e-11, masses, Geometry::lobachevsky(), pot,
                          {.samples = 61});
    auto amb = reconstruct_l2_hyperbolic(traj, masses, pot, 1e-11);

    CHECK(std::abs(amb.angles[0][2] + re.alpha) < 1e-12);             // theta = -alpha
    CHECK(std::abs(wrap_2pi(amb.angles[0][1] - 1.5 * pi)) < 1e-12);   // psi = 3pi/2 (mod 2pi)
    for (std::size_t i = 0; i < amb.times.size(); ++i) {
        CHECK(std::abs(amb.angles[i][2] - amb.angles[0][2]) < 1e-9);
        CHECK(std::abs(amb.angles[i][1] - amb.angles[0][1]) < 1e-9);
        CHECK(std::abs(separation(amb, i) - re.q) < 1e-10);
    }
    const double slope =
        (amb.angles.back()[0] - amb.angles.front()[0]) / (amb.times.back() - amb.times.front());
    CHECK(std::abs(slope) == doctest::Approx(angular_speed(re, pot)).epsilon(1e-10));

    // Z-coordinate of R1 grows like cosh(omega t) cosh(alpha)
    for (std::size_t i = 0; i < amb.times.size(); i += 12) {
        const double expect = std::cosh(re.omega * amb.times[i]) * std::cosh(re.alpha);
        CHECK(amb.R1[i].z() == doctest::Approx(expect).epsilon(1e-9));
    }
    CHECK(amb.constraint_drift < 1e-10);
    CHECK(amb.momentum_drift < 1e-9);
    CHECK(amb.energy_drift < 1e-9);
    CHECK(group_orbit_residual(amb) < 1e-8);
}

TEST_CASE("generic trajectories on both L2 charts") {
    Masses masses = Masses::normalized(0.8);
    auto pot = normalized_gravitational(Geometry::lobachevsky());
    // elliptic-momentum neighbourhood of an RE
    auto ell = solve_l2_elliptic(1.2, masses, pot);
    ReducedState s0 = ell.state;
    s0.p += 0.05;
    s0.m.x() += 0.03;
    auto traj = integrate(s0, 10.0, 1e-11, masses, Geometry::lobachevsky(), pot,
                          {.samples = 101});
    auto amb = reconstruct_l2_elliptic(traj, masses, pot, 1e-11);
    CHECK(amb.constraint_drift < 1e-10);
    CHECK(amb.momentum_drift < 1e-9);
    CHECK(amb.energy_drift < 1e-9);

    // hyperbolic-momentum neighbourhood
    auto hyp = solve_l2_hyperbolic(1.2, masses, pot);
    ReducedState h0 = hyp.state;
    h0.p += 0.04;
    h0.m.x() += 0.02;
    // horizon keeps cosh^2(kappa) ~ 2e4, so eps-level products stay under 1e-10
    auto htraj = integrate(h0, 4.5, 1e-11, masses, Geometry::lobachevsky(), pot,
                           {.samples = 61});
    auto hamb = reconstruct_l2_hyperbolic(htraj, masses, pot, 1e-11);
    CHECK(hamb.constraint_drift < 1e-10);
    CHECK(hamb.momentum_drift < 1e-9);
    CHECK(hamb.energy_drift < 1e-9);
    for (const auto& r : hamb.R1) CHECK(r.z() > 0.0);
}

TEST_CASE("chart preconditions are enforced") {
    Masses masses = Masses::normalized(1.0);
    auto pot = normalized_gravitational(Geometry::lobachevsky());
    auto ell = solve_l2_elliptic(1.0, masses, pot);
    auto traj = integrate(ell.state, 1.0, 1e-10, masses, Geometry::lobachevsky(), pot,
                          {.samples = 11});
    // elliptic momentum fed to the hyperbolic chart (C > 0 there)
    CHECK_THROWS_AS(reconstruct_l2_hyperbolic(traj, masses, pot), ChartBreakdown);
    // declared M0 inconsistent with the Casimir
    CHECK_THROWS_AS(reconstruct_l2_elliptic(traj, masses, pot, 1e-10, ell.M0 * 2.0),
                    ChartBreakdown);

    // polar chart breakdown on S^2: m along e_z (|m_z| = M0)
    auto pot_s = normalized_gravitational(Geometry::sphere());
    ReducedState polar;
    polar.m = Vec3(0.0, 0.0, 1.0);
    polar.q = 1.0;
    polar.p = 0.0;
    auto ptraj = integrate(polar, 0.5, 1e-10, masses, Geometry::sphere(), pot_s,
                           {.samples = 6});
    CHECK_THROWS_AS(reconstruct_sphere(ptraj, masses, pot_s), ChartBreakdown);
}

TEST_CASE("ambient CSV headers follow the chart") {
    Masses masses = Masses::normalized(1.0);
    auto pot = normalized_gravitational(Geometry::lobachevsky());
    auto re = solve_l2_hyperbolic(1.0, masses, pot);
    auto traj = integrate(re.state, 1.0, 1e-10, masses, Geometry::lobachevsky(), pot,
                          {.samples = 3});
    auto amb = reconstruct_l2_hyperbolic(traj, masses, pot);
    std::ostringstream os;
    ambient_csv(os, amb);
    std::string header;
    std::istringstream is(os.str());
    std::getline(is, header);
    CHECK(header == "t,kappa,psi,theta,R1_x,R1_y,R1_z,R2_x,R2_y,R2_z");

    auto ell = solve_l2_elliptic(1.0, masses, pot);
    auto etraj = integrate(ell.state, 1.0, 1e-10, masses, Geometry::lobachevsky(), pot,
                           {.samples = 3});
    auto eamb = reconstruct_l2_elliptic(etraj, masses, pot);
    std::ostringstream eos;
    ambient_csv(eos, eamb);
    std::istringstream eis(eos.str());
    std::getline(eis, header);
    CHECK(header == "t,theta,phi,psi,R1_x,R1_y,R1_z,R2_x,R2_y,R2_z");

    // SVG emission is deterministic
    CHECK(ambient_svg(eamb) == ambient_svg(eamb));
}
