// compsim: model generation, equilibrium solving, dynamics, experiments,
// and verification sweeps for the ISP quality-competition toolkit.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "compsim/best_response.hpp"
#include "compsim/dynamics.hpp"
#include "compsim/equilibrium.hpp"
#include "compsim/experiments.hpp"
#include "compsim/model.hpp"
#include "compsim/netgen.hpp"
#include "compsim/verify.hpp"

namespace {

using compsim::AttributeMatrix;
using compsim::NetworkModel;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw compsim::ParseError("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw compsim::ParseError("cannot write file: " + out_path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

json attributes_to_json(const NetworkModel& m, const AttributeMatrix& A) {
    json rows = json::array();
    for (int n = 0; n < m.isp_count(); ++n) {
        json row = json::array();
        for (int k = 0; k < m.attribute_count(); ++k) row.push_back(A.at(n, k));
        rows.push_back(row);
    }
    return rows;
}

json equilibrium_to_json(const NetworkModel& m, const compsim::EquilibriumResult& eq) {
    json j;
    j["solver"] = compsim::solver_name(eq.solver);
    j["residual"] = eq.residual;
    j["unique_in_attributes"] = eq.unique_in_attributes;
    json isps = json::array();
    for (const auto& p : m.isps) isps.push_back(p.name);
    j["isps"] = isps;
    j["attribute_names"] = m.attribute_names;
    j["attributes"] = attributes_to_json(m, eq.attributes);
    j["path_valuations"] = eq.path_valuations;
    json profits = json::object();
    for (int n = 0; n < m.isp_count(); ++n)
        profits[m.isps[n].name] = compsim::profit(m, eq.attributes, n);
    j["profits"] = profits;
    return j;
}

compsim::HomogeneousSpec homogeneous_spec_from_json(const json& j) {
    compsim::HomogeneousSpec s;
    s.Q = j.value("Q", s.Q);
    s.I = j.value("I", s.I);
    s.alpha1 = j.value("alpha1", s.alpha1);
    s.alpha0 = j.value("alpha0", s.alpha0);
    s.phi1 = j.value("phi1", s.phi1);
    s.phi0 = j.value("phi0", s.phi0);
    s.gamma1 = j.value("gamma1", s.gamma1);
    s.rho = j.value("rho", s.rho);
    s.d = j.value("d", s.d);
    s.validate();
    return s;
}

NetworkModel model_from_config(const std::string& config_path) {
    if (config_path.empty())
        throw compsim::ParseError("a model is required: pass --config <model.json>");
    return compsim::load_model(config_path);
}

// ---------------------------------------------------------------- gen

struct GenOptions {
    std::string graph_file;
    std::string sidecar;
    bool synthetic = false;
    int t1 = 5, t2 = 15, t3 = 30;
    int core = 0;
    int k_paths = 5;
    int max_hops = 5;
    int min_paths = 1;
    bool edge_markets = false;
    double total_traffic = 170000.0;
    std::string emit_graph;  // also write the (possibly synthetic) graph as text
};

std::string graph_to_text(const compsim::AsGraph& g) {
    std::ostringstream os;
    os << "# <as_id> <as_id> <p2c|p2p> [mass_a mass_b]\n";
    for (const auto& e : g.edges) {
        if (e.relation == compsim::AsRelation::CustomerToProvider) {
            // file convention: first id is the provider
            os << e.b << ' ' << e.a << " p2c " << g.node(e.b).mass << ' '
               << g.node(e.a).mass << '\n';
        } else {
            os << e.a << ' ' << e.b << " p2p " << g.node(e.a).mass << ' '
               << g.node(e.b).mass << '\n';
        }
    }
    return os.str();
}

int run_gen(const GenOptions& opt, uint64_t seed, const std::string& out) {
    compsim::AsGraph g;
    if (opt.synthetic) {
        g = compsim::synthetic_hierarchical_graph(seed, opt.t1, opt.t2, opt.t3);
    } else if (!opt.graph_file.empty()) {
        g = compsim::ingest_as_graph(opt.graph_file);
    } else {
        std::cerr << "gen: pass --graph <file> or --synthetic\n";
        return kExitUsage;
    }
    if (!opt.sidecar.empty()) compsim::load_node_sidecar(g, opt.sidecar);
    if (opt.core > 0) g = compsim::extract_core(g, opt.core);
    if (!opt.emit_graph.empty()) write_output(opt.emit_graph, graph_to_text(g));

    compsim::PipelineConfig cfg;
    cfg.k_paths = opt.k_paths;
    cfg.max_hops = opt.max_hops;
    cfg.min_paths = static_cast<size_t>(opt.min_paths);
    cfg.edge_markets_only = opt.edge_markets;
    cfg.gravity.total_traffic = opt.total_traffic;
    cfg.profile.seed = seed;
    const NetworkModel m = compsim::build_from_graph(std::move(g), cfg);
    write_output(out, compsim::to_json_string(m));
    std::cerr << "gen: " << m.isp_count() << " ISPs, " << m.paths.size() << " paths, "
              << m.markets.size() << " markets\n";
    return kExitOk;
}

// -------------------------------------------------------------- solve

int run_solve(const std::string& solver, const std::string& config, int path_index,
              const std::string& out) {
    if (solver == "homogeneous") {
        if (config.empty())
            throw compsim::ParseError("homogeneous solver needs --config <spec.json>");
        const json spec_json = json::parse(read_file(config));
        const compsim::HomogeneousSpec s = homogeneous_spec_from_json(spec_json);
        const auto eq = compsim::homogeneous_equilibrium(s);
        json j;
        j["solver"] = "homogeneous";
        j["a_plus"] = eq.a_plus;
        j["a_hat"] = eq.a_hat;
        j["path_valuation"] = s.I * s.alpha1 * eq.a_plus + s.alpha0;
        if (s.Q == 1) j["a_nbs"] = compsim::homogeneous_nbs(s);
        write_output(out, j.dump(2));
        return kExitOk;
    }

    const NetworkModel m = model_from_config(config);
    compsim::EquilibriumResult eq;
    if (solver == "single-path") {
        eq = compsim::single_path_equilibrium(m, path_index);
    } else if (solver == "single-path-nbs") {
        eq = compsim::single_path_nbs(m, path_index);
    } else if (solver == "two-path") {
        eq = compsim::two_path_equilibrium(m);
    } else if (solver == "quartic") {
        const compsim::QuarticResult q = compsim::quartic_two_path_equilibrium(m);
        AttributeMatrix A = m.zero_attributes();
        A.at(m.paths[0].isps[0], 0) = q.a1_plus;
        A.at(m.paths[1].isps[0], 0) = q.a2_plus;
        eq.attributes = A;
        eq.solver = compsim::SolverKind::Quartic;
        eq.residual = q.residual;
        for (size_t pi = 0; pi < m.paths.size(); ++pi)
            eq.path_valuations[m.paths[pi].id] =
                compsim::path_valuation(m, A, static_cast<int>(pi));
        json j = equilibrium_to_json(m, eq);
        j["used_fallback"] = q.used_fallback;
        write_output(out, j.dump(2));
        return kExitOk;
    } else if (solver == "nbs") {
        const compsim::NbsGlobalResult nbs = compsim::nbs_global(m);
        json j = equilibrium_to_json(m, nbs.result);
        j["nash_product"] = nbs.product;
        j["negative_profit_warning"] = nbs.warning;
        write_output(out, j.dump(2));
        return kExitOk;
    } else {
        std::cerr << "solve: unknown --solver '" << solver
                  << "' (homogeneous|single-path|single-path-nbs|two-path|quartic|nbs)\n";
        return kExitUsage;
    }
    write_output(out, equilibrium_to_json(m, eq).dump(2));
    return kExitOk;
}

// ----------------------------------------------------------- dynamics

AttributeMatrix start_state(const NetworkModel& m, const std::string& start) {
    if (start == "zeros") return m.zero_attributes();
    if (start == "floor" || start.empty()) return m.floor_attributes();
    if (start.rfind("random:", 0) == 0) {
        std::mt19937_64 rng(std::stoull(start.substr(7)));
        std::uniform_real_distribution<double> dist(0.0, 2.0);
        AttributeMatrix A = m.zero_attributes();
        for (double& v : A.values()) v = dist(rng);
        m.clamp_to_bounds(A);
        return A;
    }
    if (start.rfind("file:", 0) == 0) {
        const json j = json::parse(read_file(start.substr(5)));
        AttributeMatrix A = m.zero_attributes();
        for (int n = 0; n < m.isp_count(); ++n)
            for (int k = 0; k < m.attribute_count(); ++k)
                A.at(n, k) = j.at(n).at(k).get<double>();
        return A;
    }
    throw compsim::ParseError("unknown --start '" + start +
                              "' (zeros|floor|random:<seed>|file:<path>)");
}

int run_dynamics(const std::string& config, const std::string& mode, double eta,
                 double step, double tol, int max_rounds, const std::string& start,
                 const std::string& trace_csv, const std::string& out) {
    const NetworkModel m = model_from_config(config);
    compsim::DynamicsConfig cfg;
    if (mode == "round-robin") {
        cfg = compsim::DynamicsConfig::round_robin(eta, tol, max_rounds);
    } else if (mode == "ode") {
        cfg = compsim::DynamicsConfig::ode(step, tol, max_rounds);
    } else {
        std::cerr << "dynamics: unknown --mode '" << mode << "' (round-robin|ode)\n";
        return kExitUsage;
    }
    cfg.record_trace = !trace_csv.empty();

    const AttributeMatrix A0 = start_state(m, start);
    const compsim::DynamicsTrace trace =
        cfg.mode == compsim::DynamicsMode::RoundRobinBetterResponse
            ? compsim::round_robin(m, A0, cfg)
            : compsim::integrate_ode(m, A0, cfg);

    if (!trace_csv.empty()) {
        std::ofstream csv(trace_csv);
        if (!csv) throw compsim::ParseError("cannot write file: " + trace_csv);
        csv << "round,n,k,value\n";
        csv.precision(12);
        for (size_t t = 0; t < trace.states.size(); ++t)
            for (int n = 0; n < m.isp_count(); ++n)
                for (int k = 0; k < m.attribute_count(); ++k)
                    csv << t << ',' << n << ',' << k << ','
                        << trace.states[t].at(n, k) << '\n';
    }

    json j;
    j["mode"] = mode;
    j["converged"] = trace.converged;
    j["rounds"] = trace.rounds;
    j["final_residual"] = trace.final_residual;
    j["final_attributes"] = attributes_to_json(m, trace.final_state());
    json vals = json::object();
    for (size_t pi = 0; pi < m.paths.size(); ++pi)
        vals[m.paths[pi].id] =
            compsim::path_valuation(m, trace.final_state(), static_cast<int>(pi));
    j["path_valuations"] = vals;
    write_output(out, j.dump(2));
    return trace.converged ? kExitOk : kExitNumeric;
}

// --------------------------------------------------------- experiment

int run_experiment(const std::string& config, uint64_t seed, const std::string& out) {
    if (config.empty())
        throw compsim::ParseError("experiment needs --config <plan.json>");
    const json plan_json = json::parse(read_file(config));

    compsim::ExperimentPlan plan;
    if (plan_json.contains("model_file")) {
        plan.base_model = compsim::load_model(plan_json.at("model_file").get<std::string>());
    } else if (plan_json.contains("model")) {
        plan.base_model =
            compsim::model_from_json_string(plan_json.at("model").dump());
    } else {
        throw compsim::ParseError("plan JSON needs 'model_file' or an inline 'model'");
    }
    if (plan_json.contains("path_counts"))
        plan.path_counts = plan_json.at("path_counts").get<std::vector<int>>();
    plan.samples = plan_json.value("samples", plan.samples);
    plan.seed = plan_json.value("seed", seed);
    const std::string form = plan_json.value("functional_form", std::string("affine"));
    if (form == "affine") {
        plan.functional_form = compsim::FunctionalForm::Affine;
    } else if (form == "non-affine") {
        plan.functional_form = compsim::FunctionalForm::NonAffine;
    } else {
        throw compsim::ParseError("functional_form must be 'affine' or 'non-affine'");
    }
    plan.dynamics = compsim::DynamicsConfig::round_robin(
        plan_json.value("eta", 0.5), plan_json.value("dynamics_tol", 1e-6),
        plan_json.value("max_rounds", 10000));

    const std::string out_dir = out.empty() ? "." : out;
    std::filesystem::create_directories(out_dir);

    const compsim::ExperimentResult res = compsim::run_plan(plan);
    compsim::emit_csv(res.rows, res.attribute_names, out_dir + "/results.csv");
    compsim::emit_plot_data(res.rows, res.attribute_names, out_dir);

    int nonconverged = 0;
    for (const auto& cell : res.cells)
        if (!cell.converged) ++nonconverged;
    std::cerr << "experiment: " << res.cells.size() << " cells (" << nonconverged
              << " non-converged), " << res.rows.size() << " metric rows -> " << out_dir
              << "\n";
    return kExitOk;
}

// ------------------------------------------------------------- verify

int run_verify(const std::vector<std::string>& suites, uint64_t seed) {
    std::vector<std::string> todo = suites;
    if (todo.empty() || (todo.size() == 1 && todo[0] == "all"))
        todo = compsim::suite_names();
    bool all_passed = true;
    for (const auto& name : todo) {
        const compsim::SuiteResult r = compsim::run_suite(name, seed);
        std::printf("[%s] %-22s %4d checks, %d failed (%.1fs) - %s\n",
                    r.passed() ? "PASS" : "FAIL", r.suite.c_str(), r.checked, r.failed,
                    r.elapsed_seconds, r.description.c_str());
        for (const auto& msg : r.notes) std::printf("    %s\n", msg.c_str());
        all_passed = all_passed && r.passed();
    }
    return all_passed ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-attribute ISP quality-competition simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    uint64_t seed = 12345;
    std::string out, config;
    double tol = 1e-6;
    app.add_option("--seed", seed, "Seed for all randomized operations");
    app.add_option("--out", out, "Output file or directory (default: stdout)");
    app.add_option("--config", config, "JSON input (model, spec, or plan)");
    app.add_option("--tol", tol, "Numeric tolerance / convergence threshold");

    auto* gen = app.add_subcommand("gen", "Build a model from an AS graph");
    GenOptions gen_opt;
    gen->add_option("--graph", gen_opt.graph_file, "AS relationship file");
    gen->add_option("--sidecar", gen_opt.sidecar, "Node attribute JSON sidecar");
    gen->add_flag("--synthetic", gen_opt.synthetic, "Use a synthetic 3-tier topology");
    gen->add_option("--t1", gen_opt.t1, "Synthetic tier-1 AS count");
    gen->add_option("--t2", gen_opt.t2, "Synthetic tier-2 AS count");
    gen->add_option("--t3", gen_opt.t3, "Synthetic stub AS count");
    gen->add_option("--core", gen_opt.core, "Extract the k-node core first");
    gen->add_option("--k-paths", gen_opt.k_paths, "Paths kept per market");
    gen->add_option("--max-hops", gen_opt.max_hops, "Maximum ASes per path");
    gen->add_option("--min-paths", gen_opt.min_paths, "Minimum usable paths per pair");
    gen->add_flag("--edge-markets", gen_opt.edge_markets,
                  "Keep only markets between edge ASes (no customers)");
    gen->add_option("--total-traffic", gen_opt.total_traffic, "Gravity traffic total");
    gen->add_option("--emit-graph", gen_opt.emit_graph, "Also write the graph as text");

    auto* solve = app.add_subcommand("solve", "Solve for an equilibrium");
    std::string solver;
    int path_index = 0;
    solve->add_option("--solver", solver,
                      "homogeneous|single-path|single-path-nbs|two-path|quartic|nbs")
        ->required();
    solve->add_option("--path", path_index, "Path index for single-path solvers");

    auto* dyn = app.add_subcommand("dynamics", "Run competition dynamics");
    std::string mode = "round-robin", start = "floor", trace_csv;
    double eta = 0.5, step = 0.1;
    int max_rounds = 10000;
    dyn->add_option("--mode", mode, "round-robin|ode");
    dyn->add_option("--eta", eta, "Round-robin damping in (0,1]");
    dyn->add_option("--step", step, "Euler step size");
    dyn->add_option("--max-rounds", max_rounds, "Round limit");
    dyn->add_option("--start", start, "zeros|floor|random:<seed>|file:<path>");
    dyn->add_option("--trace-csv", trace_csv, "Write the full trace as CSV");

    auto* exp = app.add_subcommand("experiment", "Run a path-diversity experiment plan");

    auto* verify = app.add_subcommand("verify", "Run verification sweeps");
    std::vector<std::string> suites;
    verify->add_option("--suite", suites, "Suite name(s), or 'all'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return run_gen(gen_opt, seed, out);
        if (solve->parsed()) return run_solve(solver, config, path_index, out);
        if (dyn->parsed())
            return run_dynamics(config, mode, eta, step, tol, max_rounds, start,
                                trace_csv, out);
        if (exp->parsed()) return run_experiment(config, seed, out);
        if (verify->parsed()) return run_verify(suites, seed);
    } catch (const compsim::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const compsim::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const compsim::ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const json::exception& e) {
        std::cerr << "json error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
