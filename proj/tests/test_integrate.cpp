#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ctb/equilibria.hpp>
#include <ctb/integrate.hpp>
#include <sstream>

using namespace ctb;

TEST_CASE("zero-horizon integration returns the initial state only") {
    Masses masses(1.0, 1.0);
    auto pot = gravitational(Geometry::sphere(), 1.0);
    ReducedState s0;
    s0.m = Vec3(0.1, 0.4, 0.8);
    s0.q = 1.2;
    s0.p = 0.3;
    auto traj = integrate(s0, 0.0, 1e-10, masses, Geometry::sphere(), pot);
    REQUIRE(traj.times.size() == 1);
    CHECK(traj.times[0] == 0.0);
    CHECK(traj.states[0].q == s0.q);
    CHECK(traj.energy_drift == 0.0);
    CHECK(traj.casimir_drift == 0.0);
}

TEST_CASE("conservation on a generic S^2 orbit") {
    Masses masses = Masses::normalized(0.7);
    auto pot = normalized_gravitational(Geometry::sphere());
    ReducedState s0;
    s0.m = Vec3(0.2, 0.9, 0.5);
    s0.q = 1.0;
    s0.p = 0.1;
    auto traj = integrate(s0, 50.0, 1e-10, masses, Geometry::sphere(), pot);
    CHECK(traj.energy_drift < 1e-9);
    CHECK(traj.casimir_drift < 1e-9);
    CHECK(traj.times.size() == 201);
    CHECK(traj.times.back() == 50.0);
}

TEST_CASE("an elliptic RE is a fixed point of the reduced flow") {
    Masses masses = Masses::normalized(1.0);
    auto pot = normalized_gravitational(Geometry::lobachevsky());
    auto re = solve_l2_elliptic(0.5, masses, pot);
    auto traj = integrate(re.state, 100.0, 1e-10, masses, Geometry::lobachevsky(), pot);
    double worst = 0.0;
    for (const auto& s : traj.states) worst = std::max(worst, std::abs(s.q - 0.5));
    CHECK(worst < 1e-6);
}

TEST_CASE("forward then backward returns to the start") {
    Masses masses(1.0, 1.3);
    const double tol = 1e-10;
    for (Geometry g : {Geometry::sphere(), Geometry::lobachevsky()}) {
        auto pot = gravitational(g, 1.0);
        ReducedState s0;
        s0.m = Vec3(0.3, 0.5, 0.7);
        s0.q = 1.1;
        s0.p = -0.2;
        auto fwd = integrate(s0, 10.0, tol, masses, g, pot, {.samples = 2});
        auto back = integrate(fwd.states.back(), -10.0, tol, masses, g, pot, {.samples = 2});
        const ReducedState& e = back.states.back();
        const double err = std::sqrt((e.m - s0.m).squaredNorm() +
                                     (e.q - s0.q) * (e.q - s0.q) + (e.p - s0.p) * (e.p - s0.p));
        CHECK(err < 100.0 * tol);
    }
}

TEST_CASE("reversal equivariance") {
    Masses masses(1.0, 0.8);
    const double tol = 1e-11;
    for (Geometry g : {Geometry::sphere(), Geometry::lobachevsky()}) {
        auto pot = gravitational(g, 1.0);
        ReducedState s0;
        s0.m = Vec3(0.4, 0.6, 0.9);
        s0.q = 1.3;
        s0.p = 0.25;
        auto fwd = integrate(s0, 8.0, tol, masses, g, pot, {.samples = 81});
        ReducedState r0;
        r0.m = -s0.m;
        r0.q = s0.q;
        r0.p = -s0.p;
        auto rev = integrate(r0, -8.0, tol, masses, g, pot, {.samples = 81});
        for (std::size_t i = 0; i < fwd.states.size(); ++i) {
            const auto& a = fwd.states[i];
            const auto& b = rev.states[i];
            CHECK(std::abs(a.q - b.q) < 100.0 * tol);
            CHECK((a.m + b.m).norm() < 100.0 * tol);
            CHECK(std::abs(a.p + b.p) < 100.0 * tol);
        }
    }
}

TEST_CASE("halving the tolerance does not increase the Casimir drift") {
    Masses masses = Masses::normalized(0.7);
    auto pot = normalized_gravitational(Geometry::sphere());
    ReducedState s0;
    s0.m = Vec3(0.2, 0.9, 0.5);
    s0.q = 1.0;
    s0.p = 0.1;
    auto loose = integrate(s0, 30.0, 1e-7, masses, Geometry::sphere(), pot);
    auto tight = integrate(s0, 30.0, 5e-8, masses, Geometry::sphere(), pot);
    CHECK(tight.casimir_drift <= loose.casimir_drift * 1.05 + 1e-15);
}

TEST_CASE("singular approach is reported") {
    Masses masses(1.0, 1.0);
    auto pot = gravitational(Geometry::sphere(), 1.0);
    ReducedState s0;
    s0.m = Vec3::Zero();
    s0.q = 0.4;
    s0.p = -2.0;  // plunging toward collision, no transverse momentum to stop it
    CHECK_THROWS_AS(integrate(s0, 10.0, 1e-9, masses, Geometry::sphere(), pot),
                    SingularityApproach);
}

TEST_CASE("tolerance outside [1e-14, 1e-3] is rejected") {
    Masses masses(1.0, 1.0);
    auto pot = gravitational(Geometry::sphere(), 1.0);
    ReducedState s0;
    s0.q = 1.0;
    CHECK_THROWS_AS(integrate(s0, 1.0, 1e-2, masses, Geometry::sphere(), pot), DomainError);
    CHECK_THROWS_AS(integrate(s0, 1.0, 1e-15, masses, Geometry::sphere(), pot), DomainError);
}

TEST_CASE("dense output at explicit user times") {
    Masses masses = Masses::normalized(0.7);
    auto pot = normalized_gravitational(Geometry::sphere());
    ReducedState s0;
    s0.m = Vec3(0.2, 0.9, 0.5);
    s0.q = 1.0;
    s0.p = 0.1;
    const std::vector<double> times{0.0, 0.37, 1.0, 2.25, 5.0};
    auto traj = integrate_at(s0, times, 1e-10, masses, Geometry::sphere(), pot);
    REQUIRE(traj.times == times);
    // interpolated samples agree with direct integration to those times
    for (std::size_t i =  1; i < times.size(); ++i) {
        auto direct = integrate(s0, times[i], 1e-12, masses, Geometry::sphere(), pot,
                                {.samples = 2});
        CHECK((traj.states[i].m - direct.states.back().m).norm() < 1e-8);
        CHECK(std::abs(traj.states[i].q - direct.states.back().q) < 1e-8);
    }
    CHECK_THROWS_AS(integrate_at(s0, {}, 1e-10, masses, Geometry::sphere(), pot),
                    DomainError);
}

TEST_CASE("trajectory CSV has the documented schema") {
    Masses masses(1.0, 1.0);
    auto pot = gravitational(Geometry::lobachevsky(), 1.0);
    ReducedState s0;
    s0.m = Vec3(0.0, 0.3, 0.9);
    s0.q = 1.0;
    auto traj = integrate(s0, 1.0, 1e-9, masses, Geometry::lobachevsky(), pot, {.samples = 5});
    std::ostringstream os;
    trajectory_csv(os, traj, masses, Geometry::lobachevsky(), pot);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,m_x,m_y,m_z,q,p,H,C");
    int rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(rows == 5);
}
