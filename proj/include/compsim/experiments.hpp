// Path-diversity experiment harness: seeded parameter perturbation,
// market truncation to k paths, round-robin simulation to equilibrium,
// tier-segmented improvement metrics, and CSV/plot-data emission.
#ifndef COMPSIM_EXPERIMENTS_HPP
#define COMPSIM_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "compsim/dynamics.hpp"
#include "compsim/model.hpp"

namespace compsim {

// Replaces every numeric parameter y by max(Normal(y, (y/3)^2), 0) with
// a seeded generator: ISP parameters, path valuation parameters, market
// demand limits, and finite lower bounds. Upper bounds (hard caps such
// as a 100% clean-energy share) are kept. rho >= phi0 is re-enforced by
// resampling the pair up to 100 times, then clamping phi0 = rho.
NetworkModel perturb(const NetworkModel& m, uint64_t seed);

// Keeps the first k paths of every market (enumeration order, shortest
// first). Paths and ISPs stay in the model; dropped paths simply belong
// to no market.
NetworkModel truncate_paths(const NetworkModel& m, int k);

enum class FunctionalForm { Affine, NonAffine };

std::string functional_form_name(FunctionalForm f);

struct ExperimentPlan {
    NetworkModel base_model;
    std::vector<int> path_counts{1, 2, 3, 4, 5};  // ascending, min >= 1
    int samples = 10;
    uint64_t seed = 0;
    FunctionalForm functional_form = FunctionalForm::Affine;
    DynamicsConfig dynamics = DynamicsConfig::round_robin();

    void validate() const;
};

struct MetricsRow {
    int sample = 0;
    int path_count = 0;
    Tier tier = Tier::Unclassified;
    double frac_attr_improved = 0.0;
    double frac_profit_improved = 0.0;
    std::vector<double> mean_attr;  // per attribute, unweighted over tier ISPs
    double frac_pairs_max_val_improved = 0.0;
    double frac_pairs_min_val_improved = 0.0;
    int nonconverged = 0;  // 1 when this cell (or its baseline) did not converge
};

// One simulated (sample, path_count) cell with its perturbed/truncated
// model and the recorded equilibrium.
struct CellResult {
    int sample = 0;
    int path_count = 0;
    NetworkModel model;
    AttributeMatrix attributes;
    bool converged = false;
    int rounds = 0;
    double final_residual = 0.0;
};

struct ExperimentResult {
    std::vector<MetricsRow> rows;
    std::vector<CellResult> cells;
    std::vector<std::string> attribute_names;
};

// Runs the full plan: one perturbation per sample (shared across path
// counts), truncation, round-robin dynamics from the lower-bound start
// state, and metric aggregation against the sample's smallest-path-count
// baseline. (sample, path_count) cells run in parallel, capped by the
// COMPETITION_SIM_THREADS environment variable.
ExperimentResult run_plan(const ExperimentPlan& plan);

// Per-market valuation comparison: did the candidate's best (worst)
// path valuation strictly exceed the baseline market's best valuation?
// Markets are matched by (source, destination); a mismatch throws.
struct PairValuationMetrics {
    std::map<std::pair<std::string, std::string>, bool> max_improved;
    std::map<std::pair<std::string, std::string>, bool> min_improved;
};
PairValuationMetrics pair_valuation_metrics(const NetworkModel& baseline,
                                            const AttributeMatrix& baseline_attrs,
                                            const NetworkModel& candidate,
                                            const AttributeMatrix& candidate_attrs);

// CSV with the pinned header
// sample,path_count,tier,frac_attr_improved,frac_profit_improved,
// mean_attr_<k>...,frac_pairs_max_val_improved,frac_pairs_min_val_improved
// plus a trailing nonconverged column. Byte-deterministic.
void emit_csv(const std::vector<MetricsRow>& rows,
              const std::vector<std::string>& attribute_names, const std::string& path);

// Per-metric plot data `<metric>.dat` with columns
// `path_count tier mean stddev` (sample standard deviation across
// converged samples), plus an executable gnuplot script `plot.gp`.
void emit_plot_data(const std::vector<MetricsRow>& rows,
                    const std::vector<std::string>& attribute_names,
                    const std::string& directory);

// Thread cap from COMPETITION_SIM_THREADS (>= 1); defaults to the
// hardware concurrency when unset or unparsable.
int thread_cap();

}  // namespace compsim

#endif  // COMPSIM_EXPERIMENTS_HPP
