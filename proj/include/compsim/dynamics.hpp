// Continuous (Euler ODE) and discrete (round-robin better-response)
// competition dynamics plus analytic/numeric stability classification.
#ifndef COMPSIM_DYNAMICS_HPP
#define COMPSIM_DYNAMICS_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "compsim/equilibrium.hpp"
#include "compsim/model.hpp"

namespace compsim {

enum class DynamicsMode { OdeEuler, RoundRobinBetterResponse };
enum class VisitOrder { IndexOrder, SeededShuffle };

struct DynamicsConfig {
    DynamicsMode mode = DynamicsMode::RoundRobinBetterResponse;
    // Euler step h in ODE mode, damping eta in (0,1] in round-robin mode.
    double step = 0.5;
    double tol = 1e-6;       // max elementwise change per round
    int max_rounds = 10000;
    VisitOrder order = VisitOrder::IndexOrder;
    uint64_t seed = 0;       // for SeededShuffle
    bool record_trace = false;  // keep every state (otherwise first + last)
    // Search ceiling handed to the numeric best response on models where
    // the closed form does not apply; <= 0 selects an adaptive ceiling.
    double search_max = -1.0;

    static DynamicsConfig ode(double h = 0.1, double tol = 1e-6, int max_rounds = 10000);
    static DynamicsConfig round_robin(double eta = 0.5, double tol = 1e-6,
                                      int max_rounds = 10000);
};

struct DynamicsTrace {
    std::vector<AttributeMatrix> states;  // non-empty; first is the start state
    bool converged = false;
    int rounds = 0;  // full rounds that produced a change above tol
    double final_residual = 0.0;

    const AttributeMatrix& final_state() const { return states.back(); }
};

// Explicit Euler on da/dt = best_response - a with projection onto
// [0, bounds] after every step. Throws NumericError (with the trace
// prefix length in the message) if the state goes non-finite.
DynamicsTrace integrate_ode(const NetworkModel& m, const AttributeMatrix& A0,
                            const DynamicsConfig& cfg);

// Damped round-robin better-response: each round visits every decision
// (n,k) and moves it a fraction `step` toward its best response.
DynamicsTrace round_robin(const NetworkModel& m, const AttributeMatrix& A0,
                          const DynamicsConfig& cfg);

enum class StabilityClass { Stable, Marginal, Unstable };

std::string stability_name(StabilityClass s);

struct StabilityReport {
    Eigen::MatrixXd jacobian;
    std::vector<std::complex<double>> eigenvalues;  // numeric spectrum
    StabilityClass classification = StabilityClass::Stable;
    // Closed-form eigenvalues where available (with multiplicity).
    std::vector<std::complex<double>> analytic_eigs;
};

// Jacobian of the homogeneous-market dynamics at the equilibrium, with
// both the analytic eigenvalue set and the numeric spectrum.
StabilityReport jacobian_homogeneous(const HomogeneousSpec& spec);

// Jacobian of the two-path valuation dynamics at the given equilibrium
// (unique winner per path, phi_nk = 0 scope). Stable iff the product of
// the two off-diagonal entries is < 1.
StabilityReport jacobian_two_path(const NetworkModel& m, const EquilibriumResult& eq);

// All eigenvalues of a real square matrix (dimension <= 64); each
// eigenpair is verified to residual 1e-8.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M);

StabilityClass classify_eigenvalues(const std::vector<std::complex<double>>& eigs,
                                    double tol = 1e-9);

}  // namespace compsim

#endif  // COMPSIM_DYNAMICS_HPP
