#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ctb/reduced.hpp>
#include <random>

using namespace ctb;

namespace {

ReducedState random_state(std::mt19937& rng, Geometry g) {
    std::uniform_real_distribution<double> mdist(-2.0, 2.0);
    std::uniform_real_distribution<double> qdist(0.2, g.is_sphere() ? pi - 0.2 : 3.0);
    ReducedState s;
    s.m = Vec3(mdist(rng), mdist(rng), mdist(rng));
    s.q = qdist(rng);
    s.p = mdist(rng);
    return s;
}

}  // namespace

TEST_CASE("a_matrix entries") {
    Mat3 a = a_matrix(pi / 2, 1.0, Geometry::sphere());
    CHECK(a(0, 0) == 1.0);
    CHECK(a(1, 1) == 1.0);
    CHECK(std::abs(a(1, 2)) < 1e-15);
    CHECK(a(2, 2) == doctest::Approx(1.0));

    a = a_matrix(pi / 4, 1.0, Geometry::sphere());
    CHECK(a(1, 2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a(2, 2) == doctest::Approx(3.0).epsilon(1e-14));

    a = a_matrix(1.0, 2.0, Geometry::lobachevsky());
    CHECK(a(1, 2) == doctest::Approx(-std::cosh(1.0) / std::sinh(1.0)).epsilon(1e-15));
    CHECK(a(2, 2) ==
          doctest::Approx((2.0 + std::pow(std::cosh(1.0), 2)) / std::pow(std::sinh(1.0), 2)));
    CHECK(a(2, 1) == a(1, 2));
}

TEST_CASE("a_matrix domain errors") {
    CHECK_THROWS_AS(a_matrix(-0.1, 1.0, Geometry::sphere()), DomainError);
    CHECK_THROWS_AS(a_matrix(pi, 1.0, Geometry::sphere()), DomainError);
    CHECK_THROWS_AS(a_matrix(0.0, 1.0, Geometry::lobachevsky()), DomainError);
    CHECK_NOTHROW(a_matrix(50.0, 1.0, Geometry::lobachevsky()));
}

TEST_CASE("hamiltonian special values") {
    Masses masses(1.0, 1.0);
    auto pot = gravitational(Geometry::sphere(), 1.0);
    ReducedState s;
    s.m = Vec3::Zero();
    s.q = 0.9;
    s.p = 0.0;
    CHECK(hamiltonian(s, masses, Geometry::sphere(), pot) == doctest::Approx(pot.u(0.9)));

    s.m = Vec3(0, 0, 1);
    s.q = pi / 2;
    CHECK(hamiltonian(s, masses, Geometry::sphere(), pot) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("casimir values") {
    CHECK(casimir(Vec3(1, 2, 3), Geometry::sphere()) == 14.0);
    CHECK(casimir(Vec3(0, 1, 0), Geometry::lobachevsky()) == -1.0);
    CHECK(casimir(Vec3(1, 0, 1), Geometry::lobachevsky()) == 0.0);
}

TEST_CASE("vector field with zero momentum reduces to the potential gradient") {
    Masses masses(1.0, 2.0);
    for (Geometry g : {Geometry::sphere(), Geometry::lobachevsky()}) {
        auto pot = gravitational(g, 1.0);
        ReducedState s;
        s.m = Vec3::Zero();
        s.q = 1.1;
        s.p = 0.0;
        auto v = vector_field(s, masses, g, pot);
        CHECK(v.dm.norm() == 0.0);
        CHECK(v.dq == 0.0);
        CHECK(v.dp == doctest::Approx(-pot.du(1.1)).epsilon(1e-15));
        CHECK(std::abs(v.dp) > 0.0);
    }
}

TEST_CASE("analytic gradients of H match finite differences") {
    std::mt19937 rng(12345);
    for (Geometry g : {Geometry::sphere(), Geometry::lobachevsky()}) {
        Masses masses(1.3, 0.8);
        auto pot = gravitational(g, 1.0);
        for (int trial = 0; trial < 1000; ++trial) {
            ReducedState s = random_state(rng, g);
            auto h_at = [&](const ReducedState& x) { return hamiltonian(x, masses, g, pot); };
            const double h = 1e-6;
            Vec3 wm = dh_dm(s, masses, g);
            for (int i = 0; i < 3; ++i) {
                ReducedState a = s, b = s;
                a.m[i] += h;
                b.m[i] -= h;
                const double fd = (h_at(a) - h_at(b)) / (2.0 * h);
                CHECK(std::abs(fd - wm[i]) <= 1e-6 * (1.0 + std::abs(wm[i])));
            }
            {
                ReducedState a = s, b = s;
                a.q += h;
                b.q -= h;
                const double fd = (h_at(a) - h_at(b)) / (2.0 * h);
                const double an = dh_dq(s, masses, g, pot);
                CHECK(std::abs(fd - an) <= 1e-6 * (1.0 + std::abs(an)));
            }
            {
                ReducedState a = s, b = s;
                a.p += h;
                b.p -= h;
                const double fd = (h_at(a) - h_at(b)) / (2.0 * h);
                const double an = dh_dp(s, masses, g);
                CHECK(std::abs(fd - an) <= 1e-6 * (1.0 + std::abs(an)));
            }
        }
    }
}

TEST_CASE("Casimir is conserved along the vector field (analytic)") {
    std::mt19937 rng(777);
    for (Geometry g : {Geometry::sphere(), Geometry::lobachevsky()}) {
        Masses masses(1.0, 0.6);
        auto pot = gravitational(g, 1.0);
        for (int trial = 0; trial < 1000; ++trial) {
            ReducedState s = random_state(rng, g);
            auto v = vector_field(s, masses, g, pot);
            const double dc = casimir_gradient(s.m, g).dot(v.dm);
            CHECK(std::abs(dc) < 1e-12 * (1.0 + s.m.squaredNorm() + v.dm.norm()));
        }
    }
}

TEST_CASE("time-reversal symmetry of the energy") {
    std::mt19937 rng(99);
    for (Geometry g : {Geometry::sphere(), Geometry::lobachevsky()}) {
        Masses masses(0.7, 1.9);
        auto pot = gravitational(g, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            ReducedState s = random_state(rng, g);
            ReducedState r = s;
            r.m = -s.m;
            r.p = -s.p;
            CHECK(hamiltonian(s, masses, g, pot) ==
                  doctest::Approx(hamiltonian(r, masses, g, pot)).epsilon(1e-15));
        }
    }
}

TEST_CASE("bracket relations reproduce the flow") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> mdist(-1.5, 1.5);
    for (Geometry g : {Geometry::sphere(), Geometry::lobachevsky()}) {
        Masses masses(1.0, 1.4);
        auto pot = gravitational(g, 1.0);
        std::uniform_real_distribution<double> qdist(0.35, g.is_sphere() ? pi - 0.35 : 2.6);
        for (int trial = 0; trial < 20; ++trial) {
            ReducedState s;
            s.m = Vec3(mdist(rng), mdist(rng), mdist(rng));
            s.q = qdist(rng);
            s.p = mdist(rng);
            auto rep = bracket_check(s, masses, g, pot);
            CHECK(rep.max_flow_residual < 1e-10);
            CHECK(rep.jacobi_residual == 0.0);
        }
    }
}

TEST_CASE("momentum bracket structure constants") {
    // S^2: {m_x,m_y} = -m_z and cyclic
    CHECK(momentum_bracket(0, 1, Geometry::sphere()) == Vec3(0, 0, -1));
    CHECK(momentum_bracket(1, 2, Geometry::sphere()) == Vec3(-1, 0, 0));
    CHECK(momentum_bracket(2, 0, Geometry::sphere()) == Vec3(0, -1, 0));
    // L^2: {m_x,m_y} = +m_z, the others unchanged
    CHECK(momentum_bracket(0, 1, Geometry::lobachevsky()) == Vec3(0, 0, 1));
    CHECK(momentum_bracket(1, 2, Geometry::lobachevsky()) == Vec3(-1, 0, 0));
    CHECK(momentum_bracket(2, 0, Geometry::lobachevsky()) == Vec3(0, -1, 0));
    // antisymmetry
    CHECK(momentum_bracket(1, 0, Geometry::lobachevsky()) == Vec3(0, 0, -1));
}
