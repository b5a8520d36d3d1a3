#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "compsim/best_response.hpp"
#include "compsim/equilibrium.hpp"
#include "compsim/netgen.hpp"
#include "test_util.hpp"

using namespace compsim;

TEST_CASE("homogeneous worked instances") {
    HomogeneousSpec s;  // alpha1 = gamma1 = rho = 1, alpha0 = phi = 0
    s.d = 4.0;

    s.Q = 1;
    s.I = 1;
    CHECK(homogeneous_equilibrium(s).a_plus == doctest::Approx(1.0).epsilon(1e-9));

    s.Q = 2;
    CHECK(homogeneous_equilibrium(s).a_plus ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-9));

    s.Q = 1;
    s.I = 2;
    CHECK(homogeneous_equilibrium(s).a_plus == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(homogeneous_nbs(s) == doctest::Approx((std::sqrt(8.0) - 1.0) / 2.0).epsilon(1e-9));
}

TEST_CASE("homogeneous equilibrium is clamped at zero") {
    HomogeneousSpec s;
    s.d = 0.5;
    s.alpha0 = 5.0;   // strong base valuation
    s.gamma1 = 50.0;  // expensive attribute
    const auto eq = homogeneous_equilibrium(s);
    CHECK(eq.a_hat < 0.0);
    CHECK(eq.a_plus == 0.0);
}

TEST_CASE("homogeneous spec validation") {
    HomogeneousSpec s;
    s.Q = 0;
    CHECK_THROWS_AS(s.validate(), ModelError);
    s.Q = 1;
    s.phi0 = 2.0;  // rho defaults to 1
    CHECK_THROWS_AS(s.validate(), ModelError);
    s.phi0 = 0.0;
    s.phi1 = 0.0;
    s.gamma1 = 0.0;
    CHECK_THROWS_AS(s.validate(), ModelError);
    HomogeneousSpec nbs_multi;
    nbs_multi.Q = 2;
    CHECK_THROWS_AS(homogeneous_nbs(nbs_multi), ScopeError);
}

TEST_CASE("winner set picks the best ratio") {
    NetworkModel m = test_util::simple_market(1, 2, 1.0, 1.0, 1.0, 4.0);
    m.paths[0].coeffs[1][0] = 2.0;  // second ISP dominates alpha/gamma
    m.validate();
    const WinnerSet eq_w = path_winner_set(m, 0, true);
    CHECK(eq_w.members.size() == 1);
    CHECK(eq_w.first == std::pair<int, int>{1, 0});

    SUBCASE("ties include all members, lexicographic first") {
        m.paths[0].coeffs[1][0] = 1.0;
        const WinnerSet tied = path_winner_set(m, 0, true);
        CHECK(tied.members.size() == 2);
        CHECK(tied.first == std::pair<int, int>{0, 0});
    }
    SUBCASE("zero gamma with positive numerator is rejected") {
        m.isps[1].gamma[0] = 0.0;
        CHECK_THROWS_AS(path_winner_set(m, 0, true), NumericError);
    }
}

TEST_CASE("single-path equilibrium places mass on the winner") {
    NetworkModel m = test_util::simple_market(1, 2, 1.0, 1.0, 1.0, 4.0);
    m.paths[0].coeffs[1][0] = 4.0;
    m.isps[1].gamma[0] = 1.0;
    m.validate();
    const auto eq = single_path_equilibrium(m, 0);
    CHECK(eq.attributes.at(0, 0) == 0.0);  // loser contributes nothing
    CHECK(eq.attributes.at(1, 0) > 0.0);
    CHECK(eq.residual <= 1e-9);
    // v+ = max(alpha0, psi*sqrt(d*(rho-phi0)) - 1) with psi = sqrt(4/1) = 2
    CHECK(path_valuation(m, eq.attributes, 0) ==
          doctest::Approx(2.0 * 2.0 - 1.0).epsilon(1e-9));
    CHECK(characteristic_ratio(m, 0) == doctest::Approx(2.0));
    CHECK(is_nash_equilibrium(m, eq.attributes, 1e-6).holds);
}

TEST_CASE("single-path bargaining optimum dominates the equilibrium") {
    NetworkModel m = test_util::simple_market(1, 3, 1.2, 0.9, 1.4, 5.0, 0.0, 0.3);
    const auto eq = single_path_equilibrium(m, 0);
    const auto nbs = single_path_nbs(m, 0);
    CHECK(eq.path_valuations.at("p0") <= nbs.path_valuations.at("p0") + 1e-9);
    CHECK(nbs.residual <= 1e-6);
}

TEST_CASE("two-path equilibrium symmetric worked value") {
    NetworkModel m = test_util::simple_market(2, 1, 1.0, 1.0, 1.0, 4.0);
    const auto eq = two_path_equilibrium(m);
    CHECK(eq.path_valuations.at("p0") ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-7));
    CHECK(eq.path_valuations.at("p1") ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-7));
    CHECK(eq.residual <= 1e-8);
    CHECK(two_path_vhat_plus(1.0, 1.0, 4.0) ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-9));
}

TEST_CASE("vhat_star matches its definition") {
    const double psi = 1.4, d = 6.0, v_other = 0.8;
    CHECK(vhat_star(psi, d, v_other) ==
          doctest::Approx(psi * std::sqrt(d * (1.0 + v_other)) - (1.0 + v_other)));
}

TEST_CASE("quartic matches the closed form when phi is zero") {
    NetworkModel m = test_util::simple_market(2, 1, 1.0, 1.0, 1.0, 4.0);
    const QuarticResult q = quartic_two_path_equilibrium(m);
    CHECK(q.a1_plus == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-7));
    CHECK(q.a2_plus == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-7));
    CHECK(q.residual <= 1e-6);
    CHECK_FALSE(q.used_fallback);
}

TEST_CASE("quartic agrees with damped iteration when phi is positive") {
    NetworkModel m = test_util::simple_market(2, 1, 1.0, 0.8, 1.5, 4.0, 0.3, 0.2);
    const QuarticResult q = quartic_two_path_equilibrium(m);
    const AttributeMatrix fp = damped_iteration(m, m.zero_attributes(), 0.5, 1e-11, 200000);
    CHECK(q.a1_plus == doctest::Approx(fp.at(0, 0)).epsilon(1e-5));
    CHECK(q.a2_plus == doctest::Approx(fp.at(1, 0)).epsilon(1e-5));
}

TEST_CASE("damped iteration reaches the worked equilibrium") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    const AttributeMatrix fp = damped_iteration(m, m.zero_attributes(), 0.5, 1e-10, 10000);
    CHECK(fp.at(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("global bargaining search is at least as good as the closed form") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    m.upper_bounds = AttributeMatrix(1, 1, 5.0);
    m.validate();
    const NbsGlobalResult g = nbs_global(m);
    HomogeneousSpec s;
    s.d = 4.0;
    AttributeMatrix closed = m.zero_attributes();
    closed.at(0, 0) = homogeneous_nbs(s);
    CHECK(g.product >= nash_product(m, closed, {0}) - 1e-6);
}

TEST_CASE("harm construction reproduces the worked delta") {
    const auto c = construct_harm_counterexample(2.0, 2.0, 0.1);
    CHECK(c.psi_rbar == 0.0);
    CHECK(c.alpha_r0 == 0.0);
    CHECK(c.alpha_rbar0 == doctest::Approx(1.1));
    CHECK(c.psi_r == doctest::Approx(0.7158380).epsilon(1e-5));
    CHECK(c.delta_V == doctest::Approx(-0.0123466).epsilon(1e-4));
    CHECK(c.V_N4 < c.V_N3);
}

TEST_CASE("demand sweep finds a symmetric crossover") {
    std::vector<double> grid;
    for (int j = 0; j < 15; ++j) grid.push_back(0.25 * std::pow(10.0, j / 3.0));
    const auto sweep = pooling_demand_sweep(1.0, 1.0, 0.5, 0.5, grid);
    REQUIRE(sweep.first_crossover_d.has_value());
    bool beyond = true;
    for (const auto& row : sweep.rows)
        if (row.d >= *sweep.first_crossover_d && row.V_N4 < row.V_N3 - 1e-9) beyond = false;
    CHECK(beyond);
    CHECK_THROWS_AS(pooling_demand_sweep(0.0, 1.0, 0.0, 0.0, grid), ModelError);
}
