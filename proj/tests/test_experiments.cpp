#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <sstream>

#include "compsim/experiments.hpp"
#include "compsim/model.hpp"
#include "test_util.hpp"

using namespace compsim;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("perturbation is seeded and deterministic") {
    const NetworkModel m = test_util::simple_market(2, 2, 1.5, 0.7, 2.0, 6.0, 0.3, 0.2);
    const NetworkModel a = perturb(m, 7);
    const NetworkModel b = perturb(m, 7);
    const NetworkModel c = perturb(m, 8);
    CHECK(to_json_string(a) == to_json_string(b));
    CHECK(to_json_string(a) != to_json_string(c));
    CHECK_NOTHROW(a.validate());
}

TEST_CASE("perturbation keeps zeros and stays non-negative") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    m.isps[0].phi0 = 0.0;
    m.isps[0].gamma0 = 0.0;
    for (uint64_t s = 0; s < 50; ++s) {
        const NetworkModel p = perturb(m, s);
        CHECK(p.isps[0].phi0 == 0.0);    // exact zeros are structural, not noise
        CHECK(p.isps[0].gamma0 == 0.0);
        CHECK(p.isps[0].gamma[0] >= 0.0);
        CHECK(p.markets[0].demand_limit >= 0.0);
        CHECK(p.isps[0].rho >= p.isps[0].phi0);
    }
}

TEST_CASE("perturbation is centered on the original value") {
    const NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    double sum = 0.0;
    const int draws = 100000;
    for (int s = 0; s < draws; ++s) sum += perturb(m, 1000 + s).isps[0].gamma[0];
    const double mean = sum / draws;
    CHECK(mean > 0.97);
    CHECK(mean < 1.03);
}

TEST_CASE("perturbation respects hard upper caps") {
    NetworkModel m = test_util::simple_market(1, 1, 1.0, 1.0, 1.0, 4.0);
    m.lower_bounds = AttributeMatrix(1, 1, 0.2);
    m.upper_bounds = AttributeMatrix(1, 1, 1.0);
    m.validate();
    for (uint64_t s = 0; s < 50; ++s) {
        const NetworkModel p = perturb(m, s);
        REQUIRE(p.upper_bounds.has_value());
        CHECK(p.upper_bounds->at(0, 0) == 1.0);  // caps are kept verbatim
        CHECK(p.lower_bounds->at(0, 0) <= p.upper_bounds->at(0, 0));
    }
}

TEST_CASE("path truncation keeps the first k paths per market") {
    const NetworkModel m = test_util::simple_market(4, 1, 1.0, 1.0, 1.0, 4.0);
    const NetworkModel t = truncate_paths(m, 2);
    CHECK(t.markets[0].paths == std::vector<int>{0, 1});
    CHECK(t.paths.size() == 4);      // paths stay in the model
    CHECK(t.isp_count() == m.isp_count());
    const NetworkModel all = truncate_paths(m, 10);
    CHECK(all.markets[0].paths.size() == 4);
}

TEST_CASE("pair valuation metrics compare against the baseline best path") {
    const NetworkModel base = test_util::simple_market(2, 1, 1.0, 1.0, 1.0, 4.0, 0.0, 0.5);
    AttributeMatrix A0 = base.zero_attributes();   // both paths at 0.5
    NetworkModel cand = base;
    AttributeMatrix A1 = cand.zero_attributes();
    A1.at(0, 0) = 1.0;  // path values 1.5 and 0.5

    const PairValuationMetrics pm = pair_valuation_metrics(base, A0, cand, A1);
    const std::pair<std::string, std::string> key{"s", "t"};
    CHECK(pm.max_improved.at(key));        // 1.5 > 0.5
    CHECK_FALSE(pm.min_improved.at(key));  // 0.5 not > 0.5

    // mismatched market sets throw
    NetworkModel other = base;
    other.markets[0].destination = "elsewhere";
    CHECK_THROWS_AS(pair_valuation_metrics(base, A0, other, A1), ModelError);
}

TEST_CASE("experiment plan runs and aggregates") {
    NetworkModel m = test_util::simple_market(3, 1, 1.0, 1.0, 1.0, 4.0);
    m.isps[0].tier = Tier::T1;
    m.isps[1].tier = Tier::T2;
    m.isps[2].tier = Tier::T2;

    ExperimentPlan plan;
    plan.base_model = m;
    plan.path_counts = {1, 2, 3};
    plan.samples = 3;
    plan.seed = 5;
    plan.dynamics = DynamicsConfig::round_robin(0.5, 1e-8, 10000);

    const ExperimentResult res = run_plan(plan);
    CHECK(res.cells.size() == 9);
    for (const auto& cell : res.cells) CHECK(cell.converged);
    // rows: one per (sample, path_count, observed tier)
    CHECK(res.rows.size() >= 9 * 1);
    for (const auto& row : res.rows) {
        CHECK(row.frac_attr_improved >= 0.0);
        CHECK(row.frac_attr_improved <= 1.0);
        CHECK(row.nonconverged == 0);
        if (row.path_count == plan.path_counts.front()) {
            // the baseline compared to itself never improves strictly
            CHECK(row.frac_attr_improved == 0.0);
            CHECK(row.frac_profit_improved == 0.0);
        }
        CHECK(row.mean_attr.size() == 1);
    }

    SUBCASE("non-affine variant applies the forms") {
        plan.functional_form = FunctionalForm::NonAffine;
        const ExperimentResult res2 = run_plan(plan);
        for (const auto& cell : res2.cells) {
            CHECK(cell.model.valuation_form == ValuationForm::SqrtAttribute);
            CHECK(cell.model.cost_form == CostForm::QuadraticAttribute);
        }
    }
}

TEST_CASE("CSV emission is pinned and deterministic") {
    MetricsRow r1;
    r1.sample = 0;
    r1.path_count = 2;
    r1.tier = Tier::T1;
    r1.frac_attr_improved = 0.5;
    r1.mean_attr = {1.25};
    MetricsRow r2 = r1;
    r2.tier = Tier::T3;
    r2.nonconverged = 1;

    const std::string path = "/tmp/compsim_test_metrics.csv";
    emit_csv({r1, r2}, {"bandwidth"}, path);
    const std::string first = slurp(path);
    emit_csv({r1, r2}, {"bandwidth"}, path);
    CHECK(first == slurp(path));
    std::remove(path.c_str());

    std::istringstream lines(first);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "sample,path_count,tier,frac_attr_improved,frac_profit_improved,"
          "mean_attr_bandwidth,frac_pairs_max_val_improved,frac_pairs_min_val_improved,"
          "nonconverged");
    std::string line1;
    std::getline(lines, line1);
    CHECK(line1.substr(0, 7) == "0,2,T1,");
    CHECK(first.back() == '\n');
}

TEST_CASE("plot data files are emitted per metric") {
    MetricsRow r1;
    r1.sample = 0;
    r1.path_count = 1;
    r1.tier = Tier::T2;
    r1.frac_attr_improved = 0.25;
    r1.mean_attr = {0.5};
    MetricsRow r2 = r1;
    r2.sample = 1;
    r2.frac_attr_improved = 0.75;

    const std::string dir = "/tmp/compsim_test_plots";
    emit_plot_data({r1, r2}, {"bw"}, dir);
    const std::string dat = slurp(dir + "/frac_attr_improved.dat");
    CHECK(dat.find("path_count tier mean stddev") != std::string::npos);
    CHECK(dat.find("1 T2 0.5") != std::string::npos);  // mean of 0.25 and 0.75
    CHECK(slurp(dir + "/plot.gp").find("gnuplot") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("thread cap reads the environment") {
    setenv("COMPETITION_SIM_THREADS", "3", 1);
    CHECK(thread_cap() == 3);
    setenv("COMPETITION_SIM_THREADS", "bogus", 1);
    CHECK(thread_cap() >= 1);
    unsetenv("COMPETITION_SIM_THREADS");
    CHECK(thread_cap() >= 1);
}
