#include "compsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "compsim/best_response.hpp"

namespace compsim {

DynamicsConfig DynamicsConfig::ode(double h, double tol, int max_rounds) {
    DynamicsConfig c;
    c.mode = DynamicsMode::OdeEuler;
    c.step = h;
    c.tol = tol;
    c.max_rounds = max_rounds;
    return c;
}

DynamicsConfig DynamicsConfig::round_robin(double eta, double tol, int max_rounds) {
    DynamicsConfig c;
    c.mode = DynamicsMode::RoundRobinBetterResponse;
    c.step = eta;
    c.tol = tol;
    c.max_rounds = max_rounds;
    return c;
}

std::string stability_name(StabilityClass s) {
    switch (s) {
        case StabilityClass::Stable: return "Stable";
        case StabilityClass::Marginal: return "Marginal";
        default: return "Unstable";
    }
}

namespace {

void validate_config(const DynamicsConfig& cfg) {
    if (cfg.step <= 0) throw ModelError("dynamics step must be positive");
    if (cfg.mode == DynamicsMode::RoundRobinBetterResponse && cfg.step > 1.0)
        throw ModelError("better-response damping must lie in (0, 1]");
    if (cfg.tol <= 0 || cfg.max_rounds < 1)
        throw ModelError("dynamics tolerance and round limit must be positive");
}

// Decisions to iterate over: (n,k) pairs for ISPs that lie on some path.
std::vector<std::pair<int, int>> decision_list(const NetworkModel& m) {
    // Only ISPs on a path some market actually uses have a decision;
    // paths outside every market (e.g. after truncation) carry no demand.
    std::vector<bool> active(m.isp_count(), false);
    for (const auto& mk : m.markets)
        for (int pi : mk.paths)
            for (int n : m.paths[pi].isps) active[n] = true;
    std::vector<std::pair<int, int>> out;
    for (int n = 0; n < m.isp_count(); ++n) {
        if (!active[n]) continue;
        for (int k = 0; k < m.attribute_count(); ++k) out.emplace_back(n, k);
    }
    return out;
}

double response_of(const NetworkModel& m, const AttributeMatrix& A, int n, int k,
                   double search_max) {
    const bool closed = closed_form_applicable(m);
    const IspParams& p = m.isps[n];
    const double d = m.markets.empty() ? 0.0 : m.markets[0].demand_limit;
    if (closed && d * p.phi[k] + p.gamma[k] > 0) return best_response(m, A, n, k);
    if (search_max > 0) return numeric_best_response(m, A, n, k, search_max);
    // The current value is a good hint: between rounds the best response
    // moves little, so a local bracket search beats a full grid scan.
    return numeric_best_response_near(m, A, n, k, A.at(n, k));
}

void check_finite(const AttributeMatrix& A, int round, size_t trace_len) {
    for (double v : A.values()) {
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "dynamics diverged at round " << round << " (trace prefix of "
                << trace_len << " states is finite)";
            throw NumericError(msg.str());
        }
    }
}

void push_state(DynamicsTrace& t, const AttributeMatrix& A, bool record_all) {
    if (record_all || t.states.size() < 2)
        t.states.push_back(A);
    else
        t.states.back() = A;
}

}  // namespace

DynamicsTrace integrate_ode(const NetworkModel& m, const AttributeMatrix& A0,
                            const DynamicsConfig& cfg) {
    if (cfg.mode != DynamicsMode::OdeEuler) throw ModelError("config mode must be OdeEuler");
    validate_config(cfg);
    const auto decisions = decision_list(m);
    DynamicsTrace trace;
    trace.states.push_back(A0);
    AttributeMatrix A = A0;
    m.clamp_to_bounds(A);
    double h = cfg.step;
    double prev_residual = std::numeric_limits<double>::infinity();
    for (int round = 0; round < cfg.max_rounds; ++round) {
        double max_step = 0.0;
        AttributeMatrix next = A;
        for (const auto& [n, k] : decisions) {
            const double target = response_of(m, A, n, k, cfg.search_max);
            const double delta = h * (target - A.at(n, k));
            next.at(n, k) = A.at(n, k) + delta;
            max_step = std::max(max_step, std::abs(delta));
        }
        m.clamp_to_bounds(next);
        A = next;
        check_finite(A, round, trace.states.size());
        push_state(trace, A, cfg.record_trace);
        trace.final_residual = max_step;
        if (max_step <= cfg.tol) {
            trace.converged = true;
            trace.rounds = round;
            return trace;
        }
        // Stabilization: halve the step (once per round) if the residual grew.
        if (max_step > prev_residual) h *= 0.5;
        prev_residual = max_step;
        trace.rounds = round + 1;
    }
    return trace;
}

DynamicsTrace round_robin(const NetworkModel& m, const AttributeMatrix& A0,
                          const DynamicsConfig& cfg) {
    if (cfg.mode != DynamicsMode::RoundRobinBetterResponse)
        throw ModelError("config mode must be RoundRobinBetterResponse");
    validate_config(cfg);
    auto decisions = decision_list(m);
    std::mt19937_64 rng(cfg.seed);
    DynamicsTrace trace;
    trace.states.push_back(A0);
    AttributeMatrix A = A0;
    m.clamp_to_bounds(A);
    for (int round = 0; round < cfg.max_rounds; ++round) {
        if (cfg.order == VisitOrder::SeededShuffle)
            std::shuffle(decisions.begin(), decisions.end(), rng);
        double max_change = 0.0;
        for (const auto& [n, k] : decisions) {
            const double target = response_of(m, A, n, k, cfg.search_max);
            double a = A.at(n, k) + cfg.step * (target - A.at(n, k));
            if (a < 0) a = 0;
            AttributeMatrix& ref = A;
            const double before = ref.at(n, k);
            ref.at(n, k) = a;
            m.clamp_to_bounds(ref);
            max_change = std::max(max_change, std::abs(ref.at(n, k) - before));
        }
        check_finite(A, round, trace.states.size());
        push_state(trace, A, cfg.record_trace);
        trace.final_residual = max_change;
        if (max_change <= cfg.tol) {
            trace.converged = true;
            trace.rounds = round;
            return trace;
        }
        trace.rounds = round + 1;
    }
    return trace;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw ModelError("eigenvalues requires a square matrix");
    if (M.rows() > 64) throw ModelError("eigenvalues supports dimension <= 64");
    if (M.rows() == 0) return {};
    Eigen::EigenSolver<Eigen::MatrixXd> solver(M);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigenvalue iteration did not converge");
    std::vector<std::complex<double>> out;
    const auto vals = solver.eigenvalues();
    const auto vecs = solver.eigenvectors();
    for (int i = 0; i < M.rows(); ++i) {
        const auto v = vecs.col(i);
        const double res = (M.cast<std::complex<double>>() * v - vals[i] * v).norm() / v.norm();
        if (res > 1e-8 * std::max(1.0, M.norm()))
            throw NumericError("eigenpair residual exceeds tolerance");
        out.push_back(vals[i]);
    }
    return out;
}

StabilityClass classify_eigenvalues(const std::vector<std::complex<double>>& eigs,
                                    double tol) {
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& e : eigs) max_re = std::max(max_re, e.real());
    if (max_re < -tol) return StabilityClass::Stable;
    if (max_re <= tol) return StabilityClass::Marginal;
    return StabilityClass::Unstable;
}

StabilityReport jacobian_homogeneous(const HomogeneousSpec& s) {
    const HomogeneousEquilibrium eq = homogeneous_equilibrium(s);
    const int N = s.Q * s.I;
    StabilityReport rep;
    rep.jacobian = Eigen::MatrixXd::Zero(N, N);

    if (eq.a_hat < 0) {
        // Boundary equilibrium: the dynamics decouple and the Jacobian is
        // the negative identity.
        rep.jacobian = -Eigen::MatrixXd::Identity(N, N);
        rep.analytic_eigs.assign(N, {-1.0, 0.0});
        rep.eigenvalues = eigenvalues(rep.jacobian);
        rep.classification = classify_eigenvalues(rep.eigenvalues);
        return rep;
    }

    const double a = eq.a_hat;
    const double v_minus_path = (s.Q - 1.0) * (s.I * s.alpha1 * a + s.alpha0);
    const double v_minus_n = v_minus_path + (s.I - 1.0) * s.alpha1 * a + s.alpha0;
    const double denom = s.d * s.phi1 + s.gamma1;
    const double core = s.phi1 * (1.0 + v_minus_n) + s.alpha1 * (s.rho - s.phi0);
    const double T4 = s.d * s.phi1 * (1.0 + v_minus_path);
    const double T5 = 2.0 * denom * std::sqrt(s.d * (1.0 + v_minus_path) / denom * core);
    const double T6 = s.d * core;

    const double same_path = T4 / T5 - 1.0;
    const double cross_path = (T4 + T6) / T5 - 1.0;
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            if (i == j)
                rep.jacobian(i, j) = -1.0;
            else if (i / s.I == j / s.I)
                rep.jacobian(i, j) = same_path;
            else
                rep.jacobian(i, j) = cross_path;
        }
    }

    const double l1 = -T4 / T5;
    const double l2 = -(T4 + s.I * T6) / T5;
    const double l3 = s.Q * s.I * cross_path - (T4 + s.I * T6) / T5;
    for (int i = 0; i < s.Q * (s.I - 1); ++i) rep.analytic_eigs.push_back({l1, 0.0});
    for (int i = 0; i < s.Q - 1; ++i) rep.analytic_eigs.push_back({l2, 0.0});
    rep.analytic_eigs.push_back({l3, 0.0});

    rep.eigenvalues = eigenvalues(rep.jacobian);
    rep.classification = classify_eigenvalues(rep.eigenvalues);
    return rep;
}

StabilityReport jacobian_two_path(const NetworkModel& m, const EquilibriumResult& eq) {
    if (!eq.unique_in_attributes)
        throw ScopeError("two-path stability analysis requires a unique equilibrium");
    if (m.markets.size() != 1 || m.markets[0].paths.size() != 2)
        throw ScopeError("two-path stability requires one market with two paths");
    const int pr = m.markets[0].paths[0];
    const int pb = m.markets[0].paths[1];
    const double d = m.markets[0].demand_limit;

    const WinnerSet ws_r = path_winner_set(m, pr, true);
    const WinnerSet ws_b = path_winner_set(m, pb, true);
    const double alpha_r = m.paths[pr].coeff_for(ws_r.first.first, ws_r.first.second);
    const double alpha_b = m.paths[pb].coeff_for(ws_b.first.first, ws_b.first.second);
    const double psi_r = characteristic_ratio(m, pr);
    const double psi_b = characteristic_ratio(m, pb);
    const double v_r = eq.path_valuations.at(m.paths[pr].id);
    const double v_b = eq.path_valuations.at(m.paths[pb].id);

    auto entry = [&](double psi, double v_other, double alpha_own, double alpha_other,
                     std::pair<int, int> winner) {
        const auto unrestricted =
            unrestricted_best_response(m, eq.attributes, winner.first, winner.second);
        if (!unrestricted || *unrestricted < 0) return 0.0;
        return alpha_other / alpha_own *
               (psi * std::sqrt(d) / (2.0 * std::sqrt(1.0 + v_other)) - 1.0);
    };
    const double J_r = entry(psi_r, v_b, alpha_r, alpha_b, ws_r.first);
    const double J_b = entry(psi_b, v_r, alpha_b, alpha_r, ws_b.first);

    StabilityReport rep;
    rep.jacobian = Eigen::MatrixXd(2, 2);
    rep.jacobian << -1.0, J_r, J_b, -1.0;
    const std::complex<double> root = std::sqrt(std::complex<double>(J_r * J_b, 0.0));
    rep.analytic_eigs = {-1.0 + root, -1.0 - root};
    rep.eigenvalues = eigenvalues(rep.jacobian);
    rep.classification = classify_eigenvalues(rep.eigenvalues);
    return rep;
}

}  // namespace compsim
