#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "compsim/equilibrium.hpp"
#include "compsim/netgen.hpp"

using namespace compsim;

namespace {

// Small hand topology:
//   t1a -- t1b  (peers)
//   t1a is provider of mid1 and mid2; t1b is provider of mid2
//   mid1 is provider of stub; mid2 is provider of stub
const char* kGraphText = R"(# test topology
t1a t1b p2p 5.0 4.0
t1a mid1 p2c
t1a mid2 p2c
t1b mid2 p2c
mid1 stub p2c 2.0 1.0
mid2 stub p2c 3.0 1.0
)";

}  // namespace

TEST_CASE("graph ingestion from text") {
    const AsGraph g = as_graph_from_string(kGraphText);
    CHECK(g.nodes.size() == 5);
    CHECK(g.edges.size() == 6);
    CHECK(g.node("t1a").mass == doctest::Approx(5.0));
    CHECK(g.node("stub").mass == doctest::Approx(1.0));
    CHECK(g.node("mid1").mass == doctest::Approx(2.0));

    // p2c line lists the provider first
    auto prov = g.providers_of("mid2");
    REQUIRE(prov.size() == 2);
    CHECK(prov[0] == "t1a");
    CHECK(prov[1] == "t1b");
    CHECK(g.customers_of("t1a").size() == 2);
    CHECK(g.peers_of("t1a") == std::vector<std::string>{"t1b"});
}

TEST_CASE("ingestion rejects malformed input") {
    CHECK_THROWS_AS(as_graph_from_string("a b sideways\n"), ParseError);
    CHECK_THROWS_AS(as_graph_from_string("a b p2c 1.0\n"), ParseError);   // lone mass
    CHECK_THROWS_AS(as_graph_from_string("a a p2p\n"), ModelError);       // self edge
    CHECK_THROWS_AS(as_graph_from_string("a b p2c\nb a p2c\n"), ModelError);  // conflict
    CHECK_NOTHROW(as_graph_from_string("a b p2c\na b p2c\n"));  // identical repeat ok
}

TEST_CASE("node sidecar fills energy profiles and masses") {
    AsGraph g = as_graph_from_string("a b p2p 1.0 1.0\n");
    const std::string path = "/tmp/compsim_sidecar_test.json";
    {
        std::ofstream out(path);
        out << R"({"a": {"mean_energy_intensity": 1e-5, "idle_power": 7.0, "mass": 3.5}})";
    }
    load_node_sidecar(g, path);
    std::remove(path.c_str());
    REQUIRE(g.node("a").energy.has_value());
    CHECK(g.node("a").energy->idle_power == doctest::Approx(7.0));
    CHECK(g.node("a").mass == doctest::Approx(3.5));
    CHECK_FALSE(g.node("b").energy.has_value());
}

TEST_CASE("export-policy compliance") {
    const AsGraph g = as_graph_from_string(kGraphText);
    CHECK(gao_rexford_compliant(g, {"stub", "mid1", "t1a", "mid2"}));   // up up down
    CHECK(gao_rexford_compliant(g, {"mid1", "t1a", "t1b", "mid2"}));    // up peer down
    CHECK(gao_rexford_compliant(g, {"t1a", "mid2"}));                   // down only
    CHECK_FALSE(gao_rexford_compliant(g, {"mid1", "stub", "mid2"}));    // valley
    CHECK_FALSE(gao_rexford_compliant(g, {"mid1", "t1a", "t1b", "t1a"}));  // repeat
    CHECK_FALSE(gao_rexford_compliant(g, {"t1a", "stub"}));             // no edge
    // peer after descending is forbidden
    CHECK_FALSE(gao_rexford_compliant(g, {"mid1", "t1a", "mid2", "stub", "mid2"}));
}

TEST_CASE("path enumeration is sorted and truncated") {
    const AsGraph g = as_graph_from_string(kGraphText);
    const auto paths = enumerate_paths(g, "stub", "t1a", 10, 5);
    REQUIRE(paths.size() == 3);
    CHECK(paths[0] == std::vector<std::string>{"stub", "mid1", "t1a"});
    CHECK(paths[1] == std::vector<std::string>{"stub", "mid2", "t1a"});
    CHECK(paths[2] == std::vector<std::string>{"stub", "mid2", "t1b", "t1a"});

    CHECK(enumerate_paths(g, "stub", "t1a", 1, 5).size() == 1);
    CHECK(enumerate_paths(g, "stub", "t1a", 10, 2).empty());  // too few hops allowed
    CHECK_THROWS_AS(enumerate_paths(g, "stub", "stub", 5, 5), ModelError);
    CHECK_THROWS_AS(enumerate_paths(g, "stub", "nope", 5, 5), ModelError);
}

TEST_CASE("gravity demand by hand") {
    AsGraph g;
    g.nodes = {{"a", 2.0, std::nullopt}, {"b", 3.0, std::nullopt}, {"c", 4.0, std::nullopt}};
    const std::vector<PairDistance> pairs{{"a", "b", 1.0}, {"a", "c", 2.0}};
    GravitySpec spec;
    spec.total_traffic = 100.0;
    const auto d = gravity_demand(g, pairs, spec);
    // G_ab = 6, G_ac = 8/4 = 2; shares 6/8 and 2/8
    CHECK(d.at({"a", "b"}) == doctest::Approx(75.0));
    CHECK(d.at({"a", "c"}) == doctest::Approx(25.0));

    CHECK_THROWS_AS(gravity_demand(g, {{"a", "b", 0.0}}, spec), NumericError);
    AsGraph zero = g;
    for (auto& n : zero.nodes) n.mass = 0.0;
    CHECK_THROWS_AS(gravity_demand(zero, pairs, spec), NumericError);
}

TEST_CASE("tier classification") {
    const AsGraph g = as_graph_from_string(kGraphText);
    const auto tiers = tier_classify(g);
    CHECK(tiers.at("t1a") == Tier::T1);
    CHECK(tiers.at("t1b") == Tier::T1);
    CHECK(tiers.at("mid1") == Tier::T2);
    CHECK(tiers.at("mid2") == Tier::T2);
    CHECK(tiers.at("stub") == Tier::T3);

    // provider cycle never settles -> Other
    const AsGraph cyc = as_graph_from_string("a b p2c\nb c p2c\nc a p2c\n");
    const auto t2 = tier_classify(cyc);
    CHECK(t2.at("a") == Tier::Other);
    CHECK(t2.at("b") == Tier::Other);
}

TEST_CASE("core extraction hits the target size") {
    const AsGraph g = as_graph_from_string(kGraphText);
    const AsGraph core = extract_core(g, 2);
    CHECK(core.nodes.size() == 2);
    for (const auto& e : core.edges) {
        CHECK(core.node_index(e.a) >= 0);
        CHECK(core.node_index(e.b) >= 0);
    }
}

TEST_CASE("synthetic hierarchical graph is valid and sized") {
    const AsGraph g = synthetic_hierarchical_graph(7, 4, 8, 12);
    CHECK(g.nodes.size() == 24);
    CHECK_NOTHROW(g.validate());
    for (const auto& n : g.nodes) CHECK(n.mass > 0.0);
    const auto tiers = tier_classify(g);
    CHECK(tiers.at("t1_00") == Tier::T1);
    CHECK(tiers.at("t2_00") == Tier::T2);
    // determinism
    const AsGraph g2 = synthetic_hierarchical_graph(7, 4, 8, 12);
    CHECK(g2.edges.size() == g.edges.size());
    CHECK(g2.node("t3_05").mass == doctest::Approx(g.node("t3_05").mass));
}

TEST_CASE("energy profile synthesis is deterministic and in range") {
    AsGraph g = as_graph_from_string(kGraphText);
    ParamProfile p;
    p.seed = 42;
    synthesize_energy_profiles(g, p);
    AsGraph g2 = as_graph_from_string(kGraphText);
    synthesize_energy_profiles(g2, p);
    for (const auto& n : g.nodes) {
        REQUIRE(n.energy.has_value());
        CHECK(n.energy->mean_energy_intensity >= p.energy_intensity_min);
        CHECK(n.energy->mean_energy_intensity <= p.energy_intensity_max);
        CHECK(n.energy->idle_power >= p.idle_power_min);
        CHECK(n.energy->idle_power <= p.idle_power_max);
        CHECK(g2.node(n.id).energy->idle_power == doctest::Approx(n.energy->idle_power));
    }
}

TEST_CASE("parameter synthesis follows the recipes") {
    AsGraph g = as_graph_from_string(kGraphText);
    ParamProfile prof;
    prof.seed = 11;
    synthesize_energy_profiles(g, prof);

    MarketSpec mk;
    mk.src = "stub";
    mk.dst = "t1a";
    mk.demand = 50.0;
    mk.paths = enumerate_paths(g, "stub", "t1a", 10, 5);
    const NetworkModel m = synthesize_params(g, {mk}, prof);

    REQUIRE(m.attribute_count() == 2);
    REQUIRE(m.markets.size() == 1);
    CHECK(m.markets[0].demand_limit == doctest::Approx(50.0));
    CHECK(m.markets[0].paths.size() == 3);

    for (const auto& isp : m.isps) {
        CHECK(isp.rho == doctest::Approx(prof.rho));
        CHECK(isp.phi0 == 0.0);
        CHECK(isp.gamma0 == 0.0);
        CHECK(isp.phi[0] == 0.0);  // bandwidth has no demand-dependent cost
        CHECK(isp.gamma[0] >= 0.0);
        CHECK(isp.gamma[0] <= prof.bandwidth_cost_max);
    }

    // bandwidth coefficient alpha_rn1 = w / (|r| * mass_n) on the 2-hop path
    const int p0 = m.markets[0].paths[0];
    const Path& shortest = m.paths[p0];
    REQUIRE(shortest.isps.size() == 3);  // stub, mid1, t1a
    for (size_t i = 0; i < shortest.isps.size(); ++i) {
        const IspParams& isp = m.isps[shortest.isps[i]];
        const double mass = g.node(isp.name).mass;
        CHECK(shortest.coeffs[i][0] == doctest::Approx(prof.w / (3.0 * mass)));
        // carbon coefficient alpha_rn2 = p_co2 * carbon_max * energy intensity
        CHECK(shortest.coeffs[i][1] ==
              doctest::Approx(prof.p_co2 * prof.carbon_intensity_max *
                              g.node(isp.name).energy->mean_energy_intensity));
        // clean-energy premium costs
        CHECK(isp.phi[1] ==
              doctest::Approx(prof.g_clean_premium *
                              g.node(isp.name).energy->mean_energy_intensity));
        CHECK(isp.gamma[1] ==
              doctest::Approx(prof.g_clean_premium * g.node(isp.name).energy->idle_power));
    }

    // base valuation: market max carbon sum minus own carbon sum (>= 0,
    // zero for the dirtiest path)
    double max_base = 0.0;
    int zero_count = 0;
    for (int pi : m.markets[0].paths) {
        CHECK(m.paths[pi].base_valuation >= 0.0);
        max_base = std::max(max_base, m.paths[pi].base_valuation);
        if (m.paths[pi].base_valuation == 0.0) ++zero_count;
    }
    CHECK(zero_count >= 1);

    // clean-energy share capped at 1, bandwidth floored
    REQUIRE(m.upper_bounds.has_value());
    REQUIRE(m.lower_bounds.has_value());
    for (int n = 0; n < m.isp_count(); ++n) {
        CHECK(m.upper_bounds->at(n, 1) == doctest::Approx(1.0));
        CHECK(m.lower_bounds->at(n, 0) > 0.0);
    }

    CHECK_NOTHROW(m.validate());
}

TEST_CASE("synthesis rejects zero-mass on-path nodes") {
    AsGraph g = as_graph_from_string("a b p2c\n");  // masses default to 0
    ParamProfile prof;
    synthesize_energy_profiles(g, prof);
    MarketSpec mk;
    mk.src = "a";
    mk.dst = "b";
    mk.demand = 1.0;
    mk.paths = {{"a", "b"}};
    CHECK_THROWS_AS(synthesize_params(g, {mk}, prof), ModelError);
}

TEST_CASE("edge-markets pipeline option") {
    // Two providers (peers), two stubs multi-homed to both.
    const char* txt = R"(p1 s1 p2c 5.0 1.0
p1 s2 p2c 5.0 2.0
p2 s1 p2c 4.0 1.0
p2 s2 p2c 4.0 2.0
p1 p2 p2p
)";
    const AsGraph g = as_graph_from_string(txt);
    PipelineConfig cfg;
    cfg.k_paths = 3;
    cfg.max_hops = 4;
    cfg.gravity.total_traffic = 100.0;
    cfg.profile.seed = 7;

    const NetworkModel full = build_from_graph(g, cfg);
    cfg.edge_markets_only = true;
    const NetworkModel edge = build_from_graph(g, cfg);

    // Only stub-to-stub markets survive, but the ISP roster and the
    // synthesized bounds are unchanged.
    CHECK(edge.markets.size() < full.markets.size());
    CHECK(edge.markets.size() >= 1);
    for (const auto& mk : edge.markets) {
        CHECK(mk.source[0] == 's');
        CHECK(mk.destination[0] == 's');
    }
    CHECK(edge.isp_count() == full.isp_count());
    REQUIRE(edge.lower_bounds.has_value());
    REQUIRE(full.lower_bounds.has_value());
    for (int n = 0; n < edge.isp_count(); ++n)
        CHECK(edge.lower_bounds->at(n, 0) == doctest::Approx(full.lower_bounds->at(n, 0)));

    // Kept demand is rescaled back to the configured traffic total.
    double total = 0.0;
    for (const auto& mk : edge.markets) total += mk.demand_limit;
    CHECK(total == doctest::Approx(100.0));

    // A topology with a single customer-less AS has no edge pair.
    PipelineConfig bad = cfg;
    CHECK_THROWS_AS(build_from_graph(as_graph_from_string(kGraphText), bad), ModelError);
}

TEST_CASE("homogeneous builder shapes") {
    HomogeneousSpec s;
    s.Q = 3;
    s.I = 2;
    s.d = 4.0;
    const NetworkModel m = build_homogeneous(s);
    CHECK(m.isp_count() == 6);
    CHECK(m.paths.size() == 3);
    CHECK(m.markets.size() == 1);
    CHECK(m.markets[0].demand_limit == doctest::Approx(4.0));
    for (const auto& p : m.paths) CHECK(p.isps.size() == 2);
}

TEST_CASE("competition pair: reduced model matches N2 equilibrium") {
    HomogeneousSpec s;
    s.d = 4.0;
    const CompetitionPair pair = build_competition_pair_homogeneous(3, 1, 4.0, s);
    CHECK(pair.n1.markets.size() == 3);
    CHECK(pair.n2.markets.size() == 3);
    CHECK(pair.n2.markets[0].paths.size() == 3);
    CHECK(pair.reduced.markets.size() == 1);
    CHECK(pair.reduced.markets[0].demand_limit == doctest::Approx(12.0));
}

TEST_CASE("two-path pair builder") {
    PathParams r, rbar;
    rbar.alpha0 = 1.5;
    const TwoPathPair pair = build_two_path_pair(r, rbar, 2.0, 3.0);
    CHECK(pair.n3.markets.size() == 2);
    CHECK(pair.n4.markets.size() == 1);
    CHECK(pair.n4.markets[0].demand_limit == doctest::Approx(5.0));
    CHECK(pair.n4.markets[0].paths.size() == 2);
    CHECK(pair.n4.paths[1].base_valuation == doctest::Approx(1.5));
}
