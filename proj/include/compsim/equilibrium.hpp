// Closed-form Nash equilibria and bargaining optima: homogeneous
// markets, heterogeneous single- and two-path markets, the general
// two-path quartic, a global bargaining-product search, and the
// competition-effect constructions.
#ifndef COMPSIM_EQUILIBRIUM_HPP
#define COMPSIM_EQUILIBRIUM_HPP

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "compsim/model.hpp"

namespace compsim {

// A market of Q disjoint paths, each with I identical ISPs and a single
// attribute (attribute-sum representation).
struct HomogeneousSpec {
    int Q = 1;
    int I = 1;
    double alpha1 = 1.0;  // per-ISP valuation coefficient
    double alpha0 = 0.0;  // per-path base valuation
    double phi1 = 0.0;    // demand-dependent attribute cost
    double phi0 = 0.0;
    double gamma1 = 1.0;  // fixed attribute cost
    double rho = 1.0;
    double d = 1.0;  // market demand limit

    void validate() const;  // Q,I >= 1; rho >= phi0; d*phi1 + gamma1 > 0
};

struct HomogeneousEquilibrium {
    double a_plus = 0.0;  // max(0, a_hat)
    double a_hat = 0.0;   // unrestricted root
    double T1 = 0.0, T2 = 0.0, T3 = 0.0;
};

// Per-ISP equilibrium attribute of the homogeneous market. Throws
// NumericError on a degenerate quadratic (T1 = 0 with T2 = 0) or a
// negative discriminant.
HomogeneousEquilibrium homogeneous_equilibrium(const HomogeneousSpec& spec);

// Per-ISP bargaining-optimal attribute for a single homogeneous path
// (spec.Q must be 1).
double homogeneous_nbs(const HomogeneousSpec& spec);

enum class SolverKind {
    Homogeneous,
    SinglePath,
    SinglePathNbs,
    TwoPath,
    Quartic,
    NbsGlobal,
};

std::string solver_name(SolverKind s);

struct EquilibriumResult {
    AttributeMatrix attributes;
    std::map<std::string, double> path_valuations;
    SolverKind solver = SolverKind::SinglePath;
    double residual = 0.0;  // equilibrium: fixed-point residual; NBS: first-order residual
    bool unique_in_attributes = true;
};

// Winner set for a path: all (isp, attribute) pairs attaining the argmax
// ratio; `first` is the lexicographically first member.
struct WinnerSet {
    std::vector<std::pair<int, int>> members;
    std::pair<int, int> first{-1, -1};
};

// Winner set of a path: equilibrium_ratio=true uses alpha*(rho-phi0)/gamma,
// false uses alpha/gamma (bargaining). Throws NumericError when a
// candidate has gamma = 0 with a positive numerator.
WinnerSet path_winner_set(const NetworkModel& m, int path_index, bool equilibrium_ratio);

// Heterogeneous single-path market (phi_nk = 0 scope). Places the whole
// valuation mass on the lexicographically first winner of the
// equilibrium ratio alpha*(rho - phi0)/gamma.
EquilibriumResult single_path_equilibrium(const NetworkModel& m, int path_index);

// Bargaining optimum of the same scope (ratio alpha/gamma, aggregate net
// revenue). When the winner set has several members, an inner numeric
// search picks the product-maximizing split.
EquilibriumResult single_path_nbs(const NetworkModel& m, int path_index);

// psi_r = max over on-path (n,k) of sqrt(alpha_nk*(rho_n - phi_n0)/gamma_nk).
double characteristic_ratio(const NetworkModel& m, int path_index);

// Two disjoint paths in one market, phi_nk = 0.
EquilibriumResult two_path_equilibrium(const NetworkModel& m);

// Unrestricted two-path equilibrium valuation as a function of the two
// characteristic ratios and the demand limit (exposed for sweeps).
double two_path_vhat_plus(double psi_r, double psi_rbar, double d);
// Unrestricted best-response valuation of a path against a fixed
// opposing valuation.
double vhat_star(double psi_r, double d, double v_rbar);

struct QuarticCoefficients {
    double T4 = 0, T3 = 0, T2 = 0, T1 = 0, T0 = 0;
    double L1 = 0, L2 = 0, L3 = 0, L4 = 0, L5 = 0, L6 = 0;
};

struct QuarticResult {
    double a1_plus = 0.0;
    double a2_plus = 0.0;
    std::vector<std::complex<double>> roots;
    QuarticCoefficients coeffs;
    double residual = 0.0;
    // True when no quartic root produced a verified equilibrium and the
    // damped-iteration fixed point was returned instead.
    bool used_fallback = false;
};

// General two-path equilibrium (arbitrary phi) for a market of two
// disjoint single-ISP paths with one attribute. Candidate roots are
// validated by fixed-point residual; boundary equilibria (one side at 0)
// are checked explicitly.
QuarticResult quartic_two_path_equilibrium(const NetworkModel& m);

// Damped best-response iteration a <- a + damping*(a* - a); used as the
// general-purpose oracle for the quartic solver.
AttributeMatrix damped_iteration(const NetworkModel& m, AttributeMatrix A, double damping,
                                 double target_residual, int max_rounds);

// Numeric maximization of the profit product over a bounded attribute
// box (|N|*|K| <= 12 enforced). warning=true when only negative-profit
// points were found.
struct NbsGlobalResult {
    EquilibriumResult result;
    double product = 0.0;
    bool warning = false;
};
NbsGlobalResult nbs_global(const NetworkModel& m, int max_iters = 200);

// Parameter construction demonstrating that opening a second path can
// lower the aggregate equilibrium valuation. psi_rbar = 0; alpha_r0 = 0;
// alpha_rbar0 = d_rbar/d_r + margin; psi_r at the midpoint of the
// feasible open interval.
struct CounterexampleConstruction {
    double d_r = 0, d_rbar = 0;
    double psi_r = 0, psi_rbar = 0;
    double alpha_r0 = 0, alpha_rbar0 = 0;
    double V_N3 = 0;  // isolated two-market aggregate valuation
    double V_N4 = 0;  // shared-market aggregate valuation
    double delta_V = 0;
};
CounterexampleConstruction construct_harm_counterexample(double d_r, double d_rbar,
                                                           double margin);

// Demand sweep comparing the shared two-path market against the
// valuation-maximizing split into two isolated markets.
struct DemandSweepRow {
    double d = 0;
    double V_N3 = 0;
    double V_N4 = 0;
};
struct DemandSweepResult {
    std::vector<DemandSweepRow> rows;
    std::optional<double> first_crossover_d;  // first grid d with V_N4 >= V_N3
};
DemandSweepResult pooling_demand_sweep(double psi_r, double psi_rbar, double alpha_r0,
                                      double alpha_rbar0, const std::vector<double>& d_grid);

}  // namespace compsim

#endif  // COMPSIM_EQUILIBRIUM_HPP
