#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "compsim/model.hpp"
#include "test_util.hpp"

using namespace compsim;

TEST_CASE("valuation and cost transforms") {
    CHECK(valuation_transform(ValuationForm::Affine, 4.0) == 4.0);
    CHECK(valuation_transform(ValuationForm::SqrtAttribute, 4.0) == doctest::Approx(2.0));
    CHECK(cost_transform(CostForm::Affine, 3.0) == 3.0);
    CHECK(cost_transform(CostForm::QuadraticAttribute, 3.0) == doctest::Approx(9.0));
}

TEST_CASE("path valuation, selection probability, demand") {
    NetworkModel m = test_util::simple_market(2, 1, 2.0, 1.0, 1.0, 4.0, 0.0, 0.5);
    AttributeMatrix A = m.zero_attributes();
    A.at(0, 0) = 1.0;   // path p0 valuation 0.5 + 2*1 = 2.5
    A.at(1, 0) = 0.25;  // path p1 valuation 0.5 + 2*0.25 = 1.0

    CHECK(path_valuation(m, A, 0) == doctest::Approx(2.5));
    CHECK(path_valuation(m, A, "p1") == doctest::Approx(1.0));

    const double denom = 1.0 + 2.5 + 1.0;
    CHECK(selection_probability(m, A, 0, 0) == doctest::Approx(2.5 / denom));
    CHECK(selection_probability(m, A, 0, 1) == doctest::Approx(1.0 / denom));
    CHECK(selection_probability(m, A, 0, 0) + selection_probability(m, A, 0, 1) < 1.0);

    CHECK(isp_demand(m, A, 0) == doctest::Approx(4.0 * 2.5 / denom));
    CHECK(aggregate_valuation(m, A) == doctest::Approx(3.5));
}

TEST_CASE("sqrt valuation form changes path valuation") {
    NetworkModel m = test_util::simple_market(1, 1, 2.0, 1.0, 1.0, 4.0);
    m.valuation_form = ValuationForm::SqrtAttribute;
    AttributeMatrix A = m.zero_attributes();
    A.at(0, 0) = 9.0;
    CHECK(path_valuation(m, A, 0) == doctest::Approx(2.0 * 3.0));
}

TEST_CASE("profit matches its breakdown") {
    NetworkModel m = test_util::simple_market(2, 2, 1.5, 0.7, 2.0, 6.0, 0.3, 0.2);
    m.isps[0].gamma0 = 0.4;
    m.isps[0].phi0 = 0.1;
    AttributeMatrix A = m.zero_attributes();
    for (int n = 0; n < m.isp_count(); ++n) A.at(n, 0) = 0.3 + 0.1 * n;
    for (int n = 0; n < m.isp_count(); ++n) {
        const ProfitBreakdown b = profit_breakdown(m, A, n);
        CHECK(profit(m, A, n) == doctest::Approx(b.total()));
        CHECK(b.revenue == doctest::Approx(isp_demand(m, A, n) * m.isps[n].rho));
    }
}

TEST_CASE("quadratic cost form applies to costs only") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    m.cost_form = CostForm::QuadraticAttribute;
    AttributeMatrix A = m.zero_attributes();
    A.at(0, 0) = 2.0;
    CHECK(path_valuation(m, A, 0) == doctest::Approx(2.0));  // valuation stays affine
    const ProfitBreakdown b = profit_breakdown(m, A, 0);
    CHECK(b.demand_independent_cost == doctest::Approx(1.0 * 4.0));  // gamma * a^2
}

TEST_CASE("nash product and cheapness") {
    NetworkModel m = test_util::simple_market(1, 2, 1.0, 1.0, 1.0, 4.0);
    AttributeMatrix A = m.zero_attributes();
    A.at(0, 0) = 0.5;
    A.at(1, 0) = 0.5;
    const double p0 = profit(m, A, 0);
    const double p1 = profit(m, A, 1);
    CHECK(nash_product(m, A, {0, 1}) == doctest::Approx(p0 * p1));
    CHECK(cheapness_attribute(3.0, 10.0) == doctest::Approx(7.0));
}

TEST_CASE("validate rejects broken structures") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);

    SUBCASE("bad path index in market") {
        m.markets[0].paths.push_back(7);
        CHECK_THROWS_AS(m.validate(), ModelError);
    }
    SUBCASE("bad isp index on path") {
        m.paths[0].isps[0] = 3;
        CHECK_THROWS_AS(m.validate(), ModelError);
    }
    SUBCASE("non-positive coefficient") {
        m.paths[0].coeffs[0][0] = 0.0;
        CHECK_THROWS_AS(m.validate(), ModelError);
    }
    SUBCASE("negative base valuation") {
        m.paths[0].base_valuation = -0.1;
        CHECK_THROWS_AS(m.validate(), ModelError);
    }
    SUBCASE("rho below phi0") {
        m.isps[0].phi0 = m.isps[0].rho + 1.0;
        CHECK_THROWS_AS(m.validate(), ModelError);
    }
    SUBCASE("bounds shape mismatch") {
        m.lower_bounds = AttributeMatrix(3, 2, 0.0);
        CHECK_THROWS_AS(m.validate(), ModelError);
    }
    SUBCASE("lower bound above upper bound") {
        m.lower_bounds = AttributeMatrix(1, 1, 2.0);
        m.upper_bounds = AttributeMatrix(1, 1, 1.0);
        CHECK_THROWS_AS(m.validate(), ModelError);
    }
}

TEST_CASE("floor attributes and clamping") {
    NetworkModel m = test_util::simple_market(1, 2, 1.0, 1.0, 1.0, 4.0);
    const double inf = std::numeric_limits<double>::infinity();
    AttributeMatrix lb(2, 1, 0.25);
    lb.at(1, 0) = -inf;  // unbounded below
    AttributeMatrix ub(2, 1, 0.75);
    m.lower_bounds = lb;
    m.upper_bounds = ub;
    m.validate();

    const AttributeMatrix start = m.floor_attributes();
    CHECK(start.at(0, 0) == doctest::Approx(0.25));
    CHECK(start.at(1, 0) == doctest::Approx(0.0));

    AttributeMatrix A(2, 1, 0.0);
    A.at(0, 0) = 5.0;
    A.at(1, 0) = -3.0;
    m.clamp_to_bounds(A);
    CHECK(A.at(0, 0) == doctest::Approx(0.75));
    CHECK(A.at(1, 0) == doctest::Approx(0.0));  // clamped to non-negative
}

TEST_CASE("tier names round-trip") {
    for (Tier t : {Tier::T1, Tier::T2, Tier::T3, Tier::Other, Tier::Unclassified})
        CHECK(tier_from_name(tier_name(t)) == t);
    CHECK_THROWS_AS(tier_from_name("bogus"), ModelError);
}

TEST_CASE("JSON round trip preserves the model") {
    NetworkModel m = test_util::simple_market(2, 2, 1.5, 0.7, 2.0, 6.0, 0.3, 0.2);
    m.isps[1].tier = Tier::T2;
    m.valuation_form = ValuationForm::SqrtAttribute;
    m.cost_form = CostForm::QuadraticAttribute;
    const double inf = std::numeric_limits<double>::infinity();
    AttributeMatrix ub(4, 1, 1.0);
    ub.at(2, 0) = inf;  // serialized as null
    m.upper_bounds = ub;
    m.validate();

    const std::string text = to_json_string(m);
    const NetworkModel back = model_from_json_string(text);
    CHECK(to_json_string(back) == text);  // canonical form is a fixed point
    CHECK(back.isp_count() == m.isp_count());
    CHECK(back.isps[1].tier == Tier::T2);
    CHECK(back.valuation_form == ValuationForm::SqrtAttribute);
    CHECK(back.cost_form == CostForm::QuadraticAttribute);
    REQUIRE(back.upper_bounds.has_value());
    CHECK(std::isinf(back.upper_bounds->at(2, 0)));
    CHECK(back.upper_bounds->at(0, 0) == doctest::Approx(1.0));
    CHECK(back.markets[0].demand_limit == doctest::Approx(6.0));
    CHECK(back.paths[1].coeff_for(back.paths[1].isps[0], 0) == doctest::Approx(1.5));
}

TEST_CASE("malformed JSON raises ParseError") {
    CHECK_THROWS_AS(model_from_json_string("not json"), ParseError);
    CHECK_THROWS_AS(model_from_json_string("{}"), ParseError);
}
