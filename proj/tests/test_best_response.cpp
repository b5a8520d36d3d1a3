#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "compsim/best_response.hpp"
#include "test_util.hpp"

using namespace compsim;

TEST_CASE("closed form applicability") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    CHECK(closed_form_applicable(m));
    SUBCASE("non-affine valuation") {
        m.valuation_form = ValuationForm::SqrtAttribute;
        CHECK_FALSE(closed_form_applicable(m));
        AttributeMatrix A = m.zero_attributes();
        CHECK_THROWS_AS(unrestricted_best_response(m, A, 0, 0), ScopeError);
    }
    SUBCASE("two markets") {
        m.markets.push_back(m.markets[0]);
        CHECK_FALSE(closed_form_applicable(m));
    }
}

TEST_CASE("best response fixed point on the worked instance") {
    // Single ISP, alpha = gamma = rho = 1, d = 4: equilibrium a = 1.
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    AttributeMatrix A = m.zero_attributes();
    A.at(0, 0) = 1.0;
    CHECK(best_response(m, A, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(is_nash_equilibrium(m, A, 1e-8).holds);

    A.at(0, 0) = 0.0;  // from zero the best response overshoots the equilibrium
    CHECK(best_response(m, A, 0, 0) == doctest::Approx(1.0));  // sqrt(4*1*(0+1*1)) - 1
    CHECK_FALSE(is_nash_equilibrium(m, A, 1e-8).holds);
}

TEST_CASE("context sums competitor and sibling valuations") {
    NetworkModel m = test_util::simple_market(2, 2, 2.0, 1.0, 1.0, 4.0, 0.0, 0.5);
    AttributeMatrix A = m.zero_attributes();
    A.at(0, 0) = 1.0;  // path 0: 0.5 + 2*(1.0 + 0.25) = 3.0
    A.at(1, 0) = 0.25;
    A.at(2, 0) = 0.5;  // path 1: 0.5 + 2*(0.5 + 0.5) = 2.5
    A.at(3, 0) = 0.5;

    const BestResponseContext ctx = best_response_context(m, A, 0, 0);
    CHECK(ctx.alpha_nk_total == doctest::Approx(2.0));
    CHECK(ctx.v_minus_r_of_n == doctest::Approx(2.5));        // the other path
    CHECK(ctx.v_minus_nk == doctest::Approx(3.0 + 2.5 - 2.0));  // total minus own term
    CHECK(ctx.phi_minus_nk == doctest::Approx(0.0));
}

TEST_CASE("undefined best response restricts to zero") {
    // Second attribute with a high phi cost and a large frozen value makes
    // the effective margin negative, so the radicand goes negative.
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    m.attribute_names.push_back("q2");
    m.isps[0].phi = {0.0, 2.0};
    m.isps[0].gamma = {1.0, 1.0};
    m.paths[0].coeffs[0] = {1.0, 1.0};
    m.validate();
    AttributeMatrix A = m.zero_attributes();
    A.at(0, 1) = 5.0;  // Phi_{-nk} = 10 >> rho
    CHECK_FALSE(unrestricted_best_response(m, A, 0, 0).has_value());
    const BestResponseOutcome out = best_response_outcome(m, A, 0, 0);
    CHECK(out.restricted == 0.0);
}

TEST_CASE("off-path ISP has no defined closed-form response") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    // add an ISP that no path uses
    IspParams idle;
    idle.name = "idle";
    idle.rho = 1.0;
    idle.phi = {0.0};
    idle.gamma = {1.0};
    m.isps.push_back(idle);
    m.validate();
    AttributeMatrix A = m.zero_attributes();
    CHECK_THROWS_AS(unrestricted_best_response(m, A, 1, 0), ScopeError);
    // the numeric search still works: profit is flat minus cost, so 0 wins
    CHECK(numeric_best_response(m, A, 1, 0) == doctest::Approx(0.0));
}

TEST_CASE("bounds clamp the best response") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    m.lower_bounds = AttributeMatrix(1, 1, 1.5);
    m.upper_bounds = AttributeMatrix(1, 1, 3.0);
    m.validate();
    AttributeMatrix A = m.zero_attributes();
    A.at(0, 0) = 1.5;
    // unrestricted response at this state is below 1.5, so the bound binds
    CHECK(best_response(m, A, 0, 0) == doctest::Approx(1.5));
    CHECK(numeric_best_response(m, A, 0, 0) == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("numeric search matches the closed form") {
    NetworkModel m = test_util::simple_market(2, 1, 1.3, 0.8, 1.7, 6.0, 0.2, 0.4);
    AttributeMatrix A = m.zero_attributes();
    A.at(0, 0) = 0.6;
    A.at(1, 0) = 0.9;
    for (int n = 0; n < 2; ++n) {
        const double closed = best_response(m, A, n, 0);
        const double numeric = numeric_best_response(m, A, n, 0, 10.0);
        CHECK(closed == doctest::Approx(numeric).epsilon(1e-5));
    }
}

TEST_CASE("numeric search works outside the closed-form scope") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    m.valuation_form = ValuationForm::SqrtAttribute;
    m.cost_form = CostForm::QuadraticAttribute;
    AttributeMatrix A = m.zero_attributes();
    // profit(a) = 4*sqrt(a)/(1+sqrt(a)) - a^2; the maximizer is interior
    const double a_star = numeric_best_response(m, A, 0, 0, 5.0);
    CHECK(a_star > 0.1);
    CHECK(a_star < 5.0);
    // compare against a fine independent grid
    double best_a = 0.0, best_v = -1e18;
    for (int i = 0; i <= 200000; ++i) {
        const double a = 5.0 * i / 200000.0;
        AttributeMatrix B = A;
        B.at(0, 0) = a;
        const double v = profit(m, B, 0);
        if (v > best_v) {
            best_v = v;
            best_a = a;
        }
    }
    CHECK(a_star == doctest::Approx(best_a).epsilon(1e-3));
}

TEST_CASE("index range errors") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    AttributeMatrix A = m.zero_attributes();
    CHECK_THROWS_AS(numeric_best_response(m, A, 5, 0), ModelError);
    CHECK_THROWS_AS(numeric_best_response(m, A, 0, 3), ModelError);
}
