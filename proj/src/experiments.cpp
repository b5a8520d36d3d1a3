#include "compsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace compsim {

namespace {

constexpr double kImprovementSlack = 1e-9;

double perturb_value(std::mt19937_64& rng, double y) {
    if (y == 0.0) return 0.0;  // zero variance: unchanged
    std::normal_distribution<double> n(y, std::abs(y) / 3.0);
    return std::max(n(rng), 0.0);
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (salt + 1));
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    return x;
}

const std::vector<Tier> kTierOrder{Tier::T1, Tier::T2, Tier::T3, Tier::Other,
                                   Tier::Unclassified};

}  // namespace

NetworkModel perturb(const NetworkModel& m, uint64_t seed) {
    NetworkModel out = m;
    std::mt19937_64 rng(seed);
    for (auto& p : out.isps) {
        double rho = 0, phi0 = 0;
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            rho = perturb_value(rng, p.rho);
            phi0 = perturb_value(rng, p.phi0);
            ok = rho >= phi0;
        }
        if (!ok) phi0 = rho;
        p.rho = rho;
        p.phi0 = phi0;
        p.gamma0 = perturb_value(rng, p.gamma0);
        for (auto& v : p.phi) v = perturb_value(rng, v);
        for (auto& v : p.gamma) v = perturb_value(rng, v);
    }
    for (auto& path : out.paths) {
        path.base_valuation = perturb_value(rng, path.base_valuation);
        for (auto& row : path.coeffs)
            for (auto& v : row) {
                v = perturb_value(rng, v);
                if (v <= 0) v = std::numeric_limits<double>::min();  // keep > 0
            }
    }
    for (auto& mk : out.markets) mk.demand_limit = perturb_value(rng, mk.demand_limit);
    if (out.lower_bounds) {
        auto& lb = *out.lower_bounds;
        for (int n = 0; n < lb.isp_count(); ++n)
            for (int k = 0; k < lb.attribute_count(); ++k)
                if (std::isfinite(lb.at(n, k))) lb.at(n, k) = perturb_value(rng, lb.at(n, k));
    }
    // Upper bounds are hard caps (e.g. a 100% clean-energy share): kept.
    if (out.lower_bounds && out.upper_bounds) {
        for (int n = 0; n < out.lower_bounds->isp_count(); ++n)
            for (int k = 0; k < out.lower_bounds->attribute_count(); ++k)
                out.lower_bounds->at(n, k) =
                    std::min(out.lower_bounds->at(n, k), out.upper_bounds->at(n, k));
    }
    out.validate();
    return out;
}

NetworkModel truncate_paths(const NetworkModel& m, int k) {
    if (k < 1) throw ModelError("truncate_paths: k must be >= 1");
    NetworkModel out = m;
    for (auto& mk : out.markets)
        if (static_cast<int>(mk.paths.size()) > k) mk.paths.resize(k);
    return out;
}

std::string functional_form_name(FunctionalForm f) {
    return f == FunctionalForm::Affine ? "affine" : "non-affine";
}

void ExperimentPlan::validate() const {
    if (samples < 1) throw ModelError("plan needs at least one sample");
    if (path_counts.empty()) throw ModelError("plan needs at least one path count");
    if (!std::is_sorted(path_counts.begin(), path_counts.end()))
        throw ModelError("path_counts must be ascending");
    if (path_counts.front() < 1) throw ModelError("path counts must be >= 1");
    base_model.validate();
}

int thread_cap() {
    if (const char* env = std::getenv("COMPETITION_SIM_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) return v;
        } catch (...) {
            // fall through to the hardware default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

PairValuationMetrics pair_valuation_metrics(const NetworkModel& baseline,
                                            const AttributeMatrix& baseline_attrs,
                                            const NetworkModel& candidate,
                                            const AttributeMatrix& candidate_attrs) {
    std::map<std::pair<std::string, std::string>, const Market*> base_markets;
    for (const auto& mk : baseline.markets) base_markets[{mk.source, mk.destination}] = &mk;

    PairValuationMetrics out;
    for (const auto& mk : candidate.markets) {
        const auto key = std::make_pair(mk.source, mk.destination);
        auto it = base_markets.find(key);
        if (it == base_markets.end())
            throw ModelError("pair " + mk.source + "-" + mk.destination +
                             " missing in baseline model");
        double base_best = -std::numeric_limits<double>::infinity();
        for (int pi : it->second->paths)
            base_best = std::max(base_best, path_valuation(baseline, baseline_attrs, pi));
        double cand_max = -std::numeric_limits<double>::infinity();
        double cand_min = std::numeric_limits<double>::infinity();
        for (int pi : mk.paths) {
            const double v = path_valuation(candidate, candidate_attrs, pi);
            cand_max = std::max(cand_max, v);
            cand_min = std::min(cand_min, v);
        }
        out.max_improved[key] = cand_max > base_best + kImprovementSlack;
        out.min_improved[key] = cand_min > base_best + kImprovementSlack;
    }
    if (out.max_improved.size() != base_markets.size())
        throw ModelError("candidate is missing pairs present in the baseline model");
    return out;
}

namespace {

void run_cells_parallel(std::vector<CellResult>& cells, const DynamicsConfig& cfg) {
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            CellResult& cell = cells[i];
            const AttributeMatrix start = cell.model.floor_attributes();
            try {
                const DynamicsTrace trace =
                    cfg.mode == DynamicsMode::OdeEuler
                        ? integrate_ode(cell.model, start, cfg)
                        : round_robin(cell.model, start, cfg);
                cell.attributes = trace.final_state();
                cell.converged = trace.converged;
                cell.rounds = trace.rounds;
                cell.final_residual = trace.final_residual;
            } catch (const NumericError&) {
                cell.attributes = start;
                cell.converged = false;
                cell.rounds = cfg.max_rounds;
                cell.final_residual = std::numeric_limits<double>::infinity();
            }
        }
    };
    const int threads = std::min<int>(thread_cap(), static_cast<int>(cells.size()));
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace

ExperimentResult run_plan(const ExperimentPlan& plan) {
    plan.validate();

    NetworkModel base = plan.base_model;
    if (plan.functional_form == FunctionalForm::Affine) {
        base.valuation_form = ValuationForm::Affine;
        base.cost_form = CostForm::Affine;
    } else {
        base.valuation_form = ValuationForm::SqrtAttribute;
        base.cost_form = CostForm::QuadraticAttribute;
    }

    // One perturbation per sample, shared across path counts.
    std::vector<NetworkModel> perturbed;
    for (int s = 0; s < plan.samples; ++s)
        perturbed.push_back(perturb(base, mix_seed(plan.seed, static_cast<uint64_t>(s))));

    ExperimentResult result;
    result.attribute_names = base.attribute_names;
    for (int s = 0; s < plan.samples; ++s) {
        for (int pc : plan.path_counts) {
            CellResult cell;
            cell.sample = s;
            cell.path_count = pc;
            cell.model = truncate_paths(perturbed[s], pc);
            result.cells.push_back(std::move(cell));
        }
    }
    run_cells_parallel(result.cells, plan.dynamics);

    // Deterministic sequential aggregation over sorted cell keys.
    auto cell_at = [&](int s, int pc) -> const CellResult& {
        for (const auto& c : result.cells)
            if (c.sample == s && c.path_count == pc) return c;
        throw ModelError("internal: missing experiment cell");
    };
    const int K = base.attribute_count();
    for (int s = 0; s < plan.samples; ++s) {
        const CellResult& baseline = cell_at(s, plan.path_counts.front());
        for (int pc : plan.path_counts) {
            const CellResult& cell = cell_at(s, pc);
            const int flag = (cell.converged && baseline.converged) ? 0 : 1;

            const auto pairs = pair_valuation_metrics(baseline.model, baseline.attributes,
                                                      cell.model, cell.attributes);
            int max_cnt = 0, min_cnt = 0;
            for (const auto& [key, b] : pairs.max_improved) max_cnt += b ? 1 : 0;
            for (const auto& [key, b] : pairs.min_improved) min_cnt += b ? 1 : 0;
            const double pair_total = static_cast<double>(pairs.max_improved.size());
            const double frac_max = pair_total > 0 ? max_cnt / pair_total : 0.0;
            const double frac_min = pair_total > 0 ? min_cnt / pair_total : 0.0;

            for (Tier tier : kTierOrder) {
                std::vector<int> members;
                for (int n = 0; n < cell.model.isp_count(); ++n)
                    if (cell.model.isps[n].tier == tier) members.push_back(n);
                if (members.empty()) continue;

                MetricsRow row;
                row.sample = s;
                row.path_count = pc;
                row.tier = tier;
                row.nonconverged = flag;
                row.mean_attr.assign(K, 0.0);
                int attr_up = 0, profit_up = 0;
                for (int n : members) {
                    double sum_now = 0.0, sum_base = 0.0;
                    for (int k = 0; k < K; ++k) {
                        sum_now += cell.attributes.at(n, k);
                        sum_base += baseline.attributes.at(n, k);
                        row.mean_attr[k] += cell.attributes.at(n, k);
                    }
                    if (sum_now > sum_base + kImprovementSlack) ++attr_up;
                    const double p_now = profit(cell.model, cell.attributes, n);
                    const double p_base = profit(baseline.model, baseline.attributes, n);
                    if (p_now > p_base + kImprovementSlack) ++profit_up;
                }
                const double count = static_cast<double>(members.size());
                for (int k = 0; k < K; ++k) row.mean_attr[k] /= count;
                row.frac_attr_improved = attr_up / count;
                row.frac_profit_improved = profit_up / count;
                row.frac_pairs_max_val_improved = frac_max;
                row.frac_pairs_min_val_improved = frac_min;
                result.rows.push_back(std::move(row));
            }
        }
    }
    return result;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

std::vector<std::string> metric_names(const std::vector<std::string>& attribute_names) {
    std::vector<std::string> names{"frac_attr_improved", "frac_profit_improved"};
    for (const auto& a : attribute_names) names.push_back("mean_attr_" + a);
    names.push_back("frac_pairs_max_val_improved");
    names.push_back("frac_pairs_min_val_improved");
    return names;
}

double metric_value(const MetricsRow& row, size_t metric_index, size_t attr_count) {
    if (metric_index == 0) return row.frac_attr_improved;
    if (metric_index == 1) return row.frac_profit_improved;
    if (metric_index < 2 + attr_count) return row.mean_attr[metric_index - 2];
    if (metric_index == 2 + attr_count) return row.frac_pairs_max_val_improved;
    return row.frac_pairs_min_val_improved;
}

}  // namespace

void emit_csv(const std::vector<MetricsRow>& rows,
              const std::vector<std::string>& attribute_names, const std::string& path) {
    if (rows.empty()) throw ModelError("emit_csv: no rows");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write " + path);
    out << "sample,path_count,tier,frac_attr_improved,frac_profit_improved";
    for (const auto& a : attribute_names) out << ",mean_attr_" << a;
    out << ",frac_pairs_max_val_improved,frac_pairs_min_val_improved,nonconverged\n";
    for (const auto& r : rows) {
        out << r.sample << ',' << r.path_count << ',' << tier_name(r.tier) << ','
            << fmt(r.frac_attr_improved) << ',' << fmt(r.frac_profit_improved);
        for (double v : r.mean_attr) out << ',' << fmt(v);
        out << ',' << fmt(r.frac_pairs_max_val_improved) << ','
            << fmt(r.frac_pairs_min_val_improved) << ',' << r.nonconverged << '\n';
    }
}

void emit_plot_data(const std::vector<MetricsRow>& rows,
                    const std::vector<std::string>& attribute_names,
                    const std::string& directory) {
    if (rows.empty()) throw ModelError("emit_plot_data: no rows");
    namespace fs = std::filesystem;
    fs::create_directories(directory);

    const auto names = metric_names(attribute_names);
    for (size_t mi = 0; mi < names.size(); ++mi) {
        const fs::path file = fs::path(directory) / (names[mi] + ".dat");
        std::ofstream out(file, std::ios::binary);
        if (!out) throw ModelError("cannot write " + file.string());
        out << "# path_count tier mean stddev\n";

        std::vector<int> pcs;
        for (const auto& r : rows)
            if (std::find(pcs.begin(), pcs.end(), r.path_count) == pcs.end())
                pcs.push_back(r.path_count);
        std::sort(pcs.begin(), pcs.end());

        for (int pc : pcs) {
            for (Tier tier : kTierOrder) {
                std::vector<double> vals;
                for (const auto& r : rows)
                    if (r.path_count == pc && r.tier == tier && r.nonconverged == 0)
                        vals.push_back(metric_value(r, mi, attribute_names.size()));
                if (vals.empty()) continue;
                double mean = 0.0;
                for (double v : vals) mean += v;
                mean /= static_cast<double>(vals.size());
                double var = 0.0;
                for (double v : vals) var += (v - mean) * (v - mean);
                const double stddev =
                    vals.size() > 1 ? std::sqrt(var / (static_cast<double>(vals.size()) - 1))
                                    : 0.0;
                out << pc << ' ' << tier_name(tier) << ' ' << fmt(mean) << ' '
                    << fmt(stddev) << '\n';
            }
        }
    }

    const fs::path script = fs::path(directory) / "plot.gp";
    {
        std::ofstream out(script, std::ios::binary);
        out << "#!/usr/bin/env gnuplot\n"
               "set terminal pngcairo size 900,600\n"
               "set key outside\n"
               "set xlabel 'path count'\n";
        for (const auto& name : names) {
            out << "set output '" << name << ".png'\n"
                << "set ylabel '" << name << "'\n"
                << "plot for [t in 'T1 T2 T3 Other'] '" << name
                << ".dat' using 1:($2 eq t ? $3 : 1/0):4 with yerrorlines title t\n";
        }
    }
    fs::permissions(script,
                    fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                    fs::perm_options::add);
}

}  // namespace compsim
