#include "compsim/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "compsim/best_response.hpp"

namespace compsim {

void HomogeneousSpec::validate() const {
    if (Q < 1 || I < 1) throw ModelError("homogeneous spec requires Q, I >= 1");
    if (alpha1 <= 0) throw ModelError("homogeneous spec requires alpha1 > 0");
    if (rho < phi0) throw ModelError("homogeneous spec requires rho >= phi0");
    if (d * phi1 + gamma1 <= 0)
        throw ModelError("homogeneous spec requires d*phi1 + gamma1 > 0");
    if (alpha0 < 0 || phi1 < 0 || phi0 < 0 || gamma1 < 0 || d < 0)
        throw ModelError("homogeneous spec parameters must be non-negative");
}

HomogeneousEquilibrium homogeneous_equilibrium(const HomogeneousSpec& s) {
    s.validate();
    const double Q = s.Q, I = s.I;
    const double L = s.d / (s.d * s.phi1 + s.gamma1);
    const double net = s.rho - s.phi0;
    const double core = s.phi1 * (1.0 + Q * s.alpha0) + s.alpha1 * net;

    HomogeneousEquilibrium out;
    out.T1 = Q * Q * I * I * s.alpha1 * s.alpha1 -
             L * (Q * I - 1.0) * (Q - 1.0) * I * s.alpha1 * s.alpha1 * s.phi1;
    out.T2 = 2.0 * Q * I * s.alpha1 * (1.0 + Q * s.alpha0) -
             L * (s.alpha1 * s.phi1 * (Q * I - 1.0) * (1.0 + (Q - 1.0) * s.alpha0) +
                  I * s.alpha1 * (Q - 1.0) * core);
    out.T3 = (1.0 + Q * s.alpha0) * (1.0 + Q * s.alpha0) -
             L * (1.0 + (Q - 1.0) * s.alpha0) * core;

    if (out.T1 == 0.0) {
        if (out.T2 == 0.0)
            throw NumericError("degenerate homogeneous equilibrium: T1 = T2 = 0");
        out.a_hat = -out.T3 / out.T2;
    } else {
        const double disc = out.T2 * out.T2 - 4.0 * out.T1 * out.T3;
        if (disc < 0) {
            std::ostringstream msg;
            msg << "no real homogeneous equilibrium: discriminant " << disc
                << " (T1=" << out.T1 << ", T2=" << out.T2 << ", T3=" << out.T3 << ")";
            throw NumericError(msg.str());
        }
        out.a_hat = (std::sqrt(disc) - out.T2) / (2.0 * out.T1);
    }
    out.a_plus = std::max(0.0, out.a_hat);
    return out;
}

double homogeneous_nbs(const HomogeneousSpec& s) {
    s.validate();
    if (s.Q != 1) throw ScopeError("homogeneous NBS is defined for a single path (Q = 1)");
    const double L = s.d / (s.d * s.phi1 + s.gamma1);
    const double a_hat_path =
        (std::sqrt(L * (s.phi1 * (1.0 + s.alpha0) + s.I * s.alpha1 * (s.rho - s.phi0))) -
         (1.0 + s.alpha0)) /
        s.alpha1;
    return std::max(0.0, a_hat_path / s.I);
}

std::string solver_name(SolverKind s) {
    switch (s) {
        case SolverKind::Homogeneous: return "homogeneous";
        case SolverKind::SinglePath: return "single-path";
        case SolverKind::SinglePathNbs: return "single-path-nbs";
        case SolverKind::TwoPath: return "two-path";
        case SolverKind::Quartic: return "quartic";
        default: return "nbs-global";
    }
}

namespace {

void require_zero_phi(const NetworkModel& m) {
    for (const auto& p : m.isps)
        for (double v : p.phi)
            if (v != 0.0)
                throw ScopeError("heterogeneous closed forms require phi_nk = 0");
}

void require_affine(const NetworkModel& m) {
    if (m.valuation_form != ValuationForm::Affine || m.cost_form != CostForm::Affine)
        throw ScopeError("closed-form solvers require affine forms");
}

}  // namespace

// Winner search over on-path (isp, attribute) pairs for a given ratio
// numerator selector. Throws on gamma = 0 with positive numerator.
WinnerSet path_winner_set(const NetworkModel& m, int path_index, bool equilibrium_ratio) {
    const Path& r = m.paths[path_index];
    if (m.attribute_count() == 0) throw ModelError("model has no attributes");
    WinnerSet ws;
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < r.isps.size(); ++i) {
        const int n = r.isps[i];
        const IspParams& p = m.isps[n];
        for (int k = 0; k < m.attribute_count(); ++k) {
            const double alpha = r.coeffs[i][k];
            const double numer = equilibrium_ratio ? alpha * (p.rho - p.phi0) : alpha;
            const double gamma = p.gamma[k];
            if (gamma == 0.0) {
                if (numer > 0)
                    throw NumericError("diverging winner ratio: gamma_nk = 0 with positive numerator");
                continue;  // zero-return candidate, never a winner
            }
            const double ratio = numer / gamma;
            if (ratio > best * (1.0 + 1e-12) ||
                (best == -std::numeric_limits<double>::infinity() && ratio > best)) {
                best = ratio;
                ws.members.clear();
                ws.members.emplace_back(n, k);
            } else if (std::abs(ratio - best) <= 1e-12 * std::max(std::abs(best), 1.0)) {
                ws.members.emplace_back(n, k);
            }
        }
    }
    if (ws.members.empty())
        throw NumericError("no admissible winner candidate on path " + r.id);
    ws.first = *std::min_element(ws.members.begin(), ws.members.end());
    return ws;
}

namespace {

void require_single_path_scope(const NetworkModel& m, int path_index) {
    require_affine(m);
    require_zero_phi(m);
    if (m.markets.size() != 1)
        throw ScopeError("single-path solvers require exactly one market");
    const Market& mk = m.markets[0];
    if (mk.paths.size() != 1 || mk.paths[0] != path_index)
        throw ScopeError("market must consist of exactly the requested path");
}

// Places the valuation mass (v_target - base) on the given (n,k) using
// the path's coefficient.
void place_mass(const NetworkModel& m, int path_index, std::pair<int, int> winner,
                double v_target, AttributeMatrix& A) {
    const Path& r = m.paths[path_index];
    const double excess = v_target - r.base_valuation;
    if (excess <= 0) return;
    const double alpha = r.coeff_for(winner.first, winner.second);
    A.at(winner.first, winner.second) = excess / alpha;
}

// Finite-difference first-order residual of the Nash product at A over
// the given coordinates: gradient magnitude at interior points, positive
// ascent direction at boundary points.
double nbs_first_order_residual(const NetworkModel& m, const AttributeMatrix& A,
                                const std::vector<int>& isp_subset) {
    double residual = 0.0;
    AttributeMatrix W = A;
    const double P0 = std::abs(nash_product(m, A, isp_subset));
    const double scale = std::max(P0, 1e-12);
    for (int n : isp_subset) {
        for (int k = 0; k < m.attribute_count(); ++k) {
            const double a = A.at(n, k);
            const double h = 1e-5 * std::max(1.0, std::abs(a));
            double deriv;
            if (a > h) {
                W.at(n, k) = a + h;
                const double up = nash_product(m, W, isp_subset);
                W.at(n, k) = a - h;
                const double dn = nash_product(m, W, isp_subset);
                deriv = std::abs(up - dn) / (2.0 * h);
            } else {
                W.at(n, k) = a + h;
                const double up = nash_product(m, W, isp_subset);
                W.at(n, k) = a;
                const double at = nash_product(m, W, isp_subset);
                deriv = std::max(0.0, (up - at) / h);  // boundary: ascent is a violation
            }
            W.at(n, k) = a;
            residual = std::max(residual, deriv * std::max(1.0, std::abs(a)) / scale);
        }
    }
    return residual;
}

std::map<std::string, double> valuations_of(const NetworkModel& m, const AttributeMatrix& A) {
    std::map<std::string, double> out;
    for (size_t i = 0; i < m.paths.size(); ++i)
        out[m.paths[i].id] = path_valuation(m, A, static_cast<int>(i));
    return out;
}

}  // namespace

double characteristic_ratio(const NetworkModel& m, int path_index) {
    const Path& r = m.paths[path_index];
    if (r.isps.empty()) throw ModelError("empty path");
    double best = 0.0;
    for (size_t i = 0; i < r.isps.size(); ++i) {
        const IspParams& p = m.isps[r.isps[i]];
        for (int k = 0; k < m.attribute_count(); ++k) {
            if (p.gamma[k] <= 0)
                throw NumericError("characteristic ratio undefined: gamma_nk = 0");
            best = std::max(best, r.coeffs[i][k] * (p.rho - p.phi0) / p.gamma[k]);
        }
    }
    return std::sqrt(best);
}

EquilibriumResult single_path_equilibrium(const NetworkModel& m, int path_index) {
    require_single_path_scope(m, path_index);
    const Path& r = m.paths[path_index];
    const double d = m.markets[0].demand_limit;
    const WinnerSet ws = path_winner_set(m, path_index, /*equilibrium_ratio=*/true);

    double v_inner = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < r.isps.size(); ++i) {
        const IspParams& p = m.isps[r.isps[i]];
        for (int k = 0; k < m.attribute_count(); ++k) {
            if (p.gamma[k] == 0.0) continue;
            const double cand =
                std::sqrt(r.coeffs[i][k] / p.gamma[k]) * std::sqrt(d * (p.rho - p.phi0)) - 1.0;
            v_inner = std::max(v_inner, cand);
        }
    }
    const double v_plus = std::max(r.base_valuation, v_inner);

    EquilibriumResult out;
    out.solver = SolverKind::SinglePath;
    out.attributes = m.zero_attributes();
    place_mass(m, path_index, ws.first, v_plus, out.attributes);
    out.path_valuations = valuations_of(m, out.attributes);
    out.unique_in_attributes = ws.members.size() == 1;
    out.residual = is_nash_equilibrium(m, out.attributes, 1e-6).max_residual;
    return out;
}

EquilibriumResult single_path_nbs(const NetworkModel& m, int path_index) {
    require_single_path_scope(m, path_index);
    const Path& r = m.paths[path_index];
    const double d = m.markets[0].demand_limit;
    const WinnerSet ws = path_winner_set(m, path_index, /*equilibrium_ratio=*/false);

    double net_total = 0.0;
    for (int n : r.isps) net_total += m.isps[n].rho - m.isps[n].phi0;

    double v_inner = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < r.isps.size(); ++i) {
        const IspParams& p = m.isps[r.isps[i]];
        for (int k = 0; k < m.attribute_count(); ++k) {
            if (p.gamma[k] == 0.0) continue;
            const double cand =
                std::sqrt(r.coeffs[i][k] / p.gamma[k]) * std::sqrt(d * net_total) - 1.0;
            v_inner = std::max(v_inner, cand);
        }
    }
    const double v_circ = std::max(r.base_valuation, v_inner);

    EquilibriumResult out;
    out.solver = SolverKind::SinglePathNbs;
    out.attributes = m.zero_attributes();
    out.unique_in_attributes = ws.members.size() == 1;

    const double excess = v_circ - r.base_valuation;
    if (excess > 0 && ws.members.size() > 1) {
        // Inner fairness search: split the valuation mass across the tied
        // winners so that the profit product is maximized.
        const size_t W = ws.members.size();
        std::vector<double> share(W, excess / static_cast<double>(W));
        auto apply = [&](AttributeMatrix& A) {
            for (size_t i = 0; i < W; ++i) {
                const auto [n, k] = ws.members[i];
                A.at(n, k) = share[i] / r.coeff_for(n, k);
            }
        };
        auto product = [&]() {
            AttributeMatrix A = m.zero_attributes();
            apply(A);
            return nash_product(m, A, r.isps);
        };
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int sweep = 0; sweep < 25; ++sweep) {
            for (size_t i = 0; i < W; ++i) {
                for (size_t j = i + 1; j < W; ++j) {
                    const double pool = share[i] + share[j];
                    if (pool <= 0) continue;
                    double lo = 0.0, hi = pool;
                    double c = hi - gr * (hi - lo), e = lo + gr * (hi - lo);
                    auto eval = [&](double t) {
                        share[i] = t;
                        share[j] = pool - t;
                        return product();
                    };
                    double fc = eval(c), fe = eval(e);
                    while (hi - lo > 1e-10 * std::max(1.0, pool)) {
                        if (fc >= fe) {
                            hi = e;
                            e = c;
                            fe = fc;
                            c = hi - gr * (hi - lo);
                            fc = eval(c);
                        } else {
                            lo = c;
                            c = e;
                            fc = fe;
                            e = lo + gr * (hi - lo);
                            fe = eval(e);
                        }
                    }
                    const double t = 0.5 * (lo + hi);
                    share[i] = t;
                    share[j] = pool - t;
                }
            }
        }
        apply(out.attributes);
    } else {
        place_mass(m, path_index, ws.first, v_circ, out.attributes);
    }
    out.path_valuations = valuations_of(m, out.attributes);
    out.residual = nbs_first_order_residual(m, out.attributes, r.isps);
    return out;
}

double vhat_star(double psi_r, double d, double v_rbar) {
    return psi_r * std::sqrt(d) * std::sqrt(1.0 + v_rbar) - (1.0 + v_rbar);
}

double two_path_vhat_plus(double psi_r, double psi_rbar, double d) {
    const double s = psi_r * psi_r + psi_rbar * psi_rbar;
    if (s <= 0) return -1.0;
    const double prod = psi_r * psi_rbar;
    return psi_r * psi_r * psi_r * psi_rbar / (s * s) *
               (std::sqrt(d * s + 0.25 * prod * prod * d * d) + 0.5 * d * prod) -
           psi_rbar * psi_rbar / s;
}

EquilibriumResult two_path_equilibrium(const NetworkModel& m) {
    require_affine(m);
    require_zero_phi(m);
    if (m.markets.size() != 1 || m.markets[0].paths.size() != 2)
        throw ScopeError("two-path solver requires one market with exactly two paths");
    const int pr = m.markets[0].paths[0];
    const int pb = m.markets[0].paths[1];
    for (int n : m.paths[pr].isps)
        if (m.paths[pb].contains(n)) throw ScopeError("two-path solver requires disjoint paths");

    const double d = m.markets[0].demand_limit;
    const double psi_r = characteristic_ratio(m, pr);
    const double psi_b = characteristic_ratio(m, pb);
    const double base_r = m.paths[pr].base_valuation;
    const double base_b = m.paths[pb].base_valuation;

    double v_r, v_b;
    if (psi_r == 0.0 && psi_b == 0.0) {
        v_r = base_r;
        v_b = base_b;
    } else {
        const double vhat_b = two_path_vhat_plus(psi_b, psi_r, d);
        const double vhat_r = two_path_vhat_plus(psi_r, psi_b, d);
        v_r = std::max(base_r, vhat_star(psi_r, d, std::max(base_b, vhat_b)));
        v_b = std::max(base_b, vhat_star(psi_b, d, std::max(base_r, vhat_r)));
    }

    const WinnerSet ws_r = path_winner_set(m, pr, true);
    const WinnerSet ws_b = path_winner_set(m, pb, true);

    EquilibriumResult out;
    out.solver = SolverKind::TwoPath;
    out.attributes = m.zero_attributes();
    place_mass(m, pr, ws_r.first, v_r, out.attributes);
    place_mass(m, pb, ws_b.first, v_b, out.attributes);
    out.path_valuations = valuations_of(m, out.attributes);
    out.unique_in_attributes = ws_r.members.size() == 1 && ws_b.members.size() == 1;
    out.residual = is_nash_equilibrium(m, out.attributes, 1e-6).max_residual;
    return out;
}

AttributeMatrix damped_iteration(const NetworkModel& m, AttributeMatrix A, double damping,
                                 double target_residual, int max_rounds) {
    const bool closed = closed_form_applicable(m);
    for (int round = 0; round < max_rounds; ++round) {
        double residual = 0.0;
        for (int n = 0; n < m.isp_count(); ++n) {
            bool on_path = false;
            for (const auto& r : m.paths)
                if (r.contains(n)) on_path = true;
            if (!on_path) continue;
            for (int k = 0; k < m.attribute_count(); ++k) {
                const IspParams& p = m.isps[n];
                const double d = m.markets.empty() ? 0.0 : m.markets[0].demand_limit;
                double br;
                if (closed && d * p.phi[k] + p.gamma[k] > 0)
                    br = best_response(m, A, n, k);
                else
                    br = numeric_best_response(m, A, n, k);
                residual = std::max(residual, std::abs(br - A.at(n, k)));
                A.at(n, k) += damping * (br - A.at(n, k));
                if (A.at(n, k) < 0) A.at(n, k) = 0;
            }
        }
        if (residual <= target_residual) break;
    }
    return A;
}

namespace {

std::vector<std::complex<double>> polynomial_roots(std::vector<double> coeffs_desc) {
    // Strip numerically-zero leading coefficients.
    double scale = 0.0;
    for (double c : coeffs_desc) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return {};
    size_t first = 0;
    while (first < coeffs_desc.size() && std::abs(coeffs_desc[first]) < 1e-12 * scale) ++first;
    coeffs_desc.erase(coeffs_desc.begin(), coeffs_desc.begin() + first);
    const int deg = static_cast<int>(coeffs_desc.size()) - 1;
    if (deg < 1) return {};
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) C(i, deg - 1) = -coeffs_desc[deg - i] / coeffs_desc[0];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(C);
    std::vector<std::complex<double>> roots;
    for (int i = 0; i < deg; ++i) roots.push_back(solver.eigenvalues()[i]);
    return roots;
}

struct TwoPathNodes {
    int path1, path2, node1, node2;
};

TwoPathNodes require_quartic_scope(const NetworkModel& m) {
    require_affine(m);
    if (m.markets.size() != 1 || m.markets[0].paths.size() != 2)
        throw ScopeError("quartic solver requires one market with two paths");
    if (m.attribute_count() != 1)
        throw ScopeError("quartic solver requires a single attribute");
    const int p1 = m.markets[0].paths[0];
    const int p2 = m.markets[0].paths[1];
    if (m.paths[p1].isps.size() != 1 || m.paths[p2].isps.size() != 1)
        throw ScopeError("quartic solver requires single-ISP paths");
    const int n1 = m.paths[p1].isps[0];
    const int n2 = m.paths[p2].isps[0];
    if (n1 == n2) throw ScopeError("quartic solver requires disjoint paths");
    return {p1, p2, n1, n2};
}

}  // namespace

QuarticResult quartic_two_path_equilibrium(const NetworkModel& m) {
    const TwoPathNodes tp = require_quartic_scope(m);
    const double d = m.markets[0].demand_limit;
    const double a1c = m.paths[tp.path1].coeffs[0][0];  // valuation coefficient of node 1
    const double a2c = m.paths[tp.path2].coeffs[0][0];
    const double b10 = m.paths[tp.path1].base_valuation;
    const double b20 = m.paths[tp.path2].base_valuation;
    const IspParams& p1 = m.isps[tp.node1];
    const IspParams& p2 = m.isps[tp.node2];
    const double phi11 = p1.phi[0], phi10 = p1.phi0, g11 = p1.gamma[0], r1 = p1.rho;
    const double phi21 = p2.phi[0], phi20 = p2.phi0, g21 = p2.gamma[0], r2 = p2.rho;
    if (d * phi21 + g21 <= 0 || d * phi11 + g11 <= 0)
        throw NumericError("degenerate cost in quartic solver");

    QuarticCoefficients c;
    c.L1 = d / (d * phi21 + g21);
    c.L2 = g11 / (d * phi21 + g21);
    c.L3 = phi21 * (2.0 + 2.0 * b10 + b20) - a2c * (phi20 - r2);
    c.L4 = (1.0 + b10) * (phi21 * (1.0 + b10 + b20) + a2c * (r2 - phi20));
    c.L5 = phi11 * b10 - a1c * (r1 - phi10);
    c.L6 = -b10 * (r1 - phi10);

    const double A = a1c;
    c.T4 = std::pow(A, 4) *
           (phi11 * (2.0 * phi21 * (2.0 * phi11 * c.L1 + c.L2) - phi11) -
            phi21 * phi21 * c.L2 * c.L2);
    c.T3 = 2.0 * std::pow(A, 3) *
           (phi11 * (2.0 * c.L1 * (phi11 * c.L3 + phi21 * c.L5) + c.L2 * c.L3 - c.L5) +
            phi21 * (c.L2 * c.L5 - c.L2 * c.L2 * c.L3));
    c.T2 = A * A *
           (c.L1 * (4.0 * phi11 * phi11 * c.L4 + 4.0 * phi11 * c.L3 * c.L5 +
                    phi21 * c.L5 * c.L5) -
            c.L2 * c.L2 * (2.0 * phi21 * c.L4 + c.L3 * c.L3) +
            2.0 * c.L2 * (phi11 * c.L4 + c.L5 * c.L3 + phi21 * A * c.L6) -
            2.0 * phi11 * A * c.L6 - c.L5 * c.L5);
    c.T1 = A *
           (c.L1 * (4.0 * phi11 * c.L4 * c.L5 + c.L5 * c.L5 * c.L3) -
            2.0 * c.L2 * c.L2 * c.L3 * c.L4 +
            2.0 * c.L2 * (c.L5 * c.L4 + A * c.L3 * c.L6) - 2.0 * A * c.L5 * c.L6);
    c.T0 = c.L1 * c.L4 * c.L5 * c.L5 - c.L2 * c.L2 * c.L4 * c.L4 +
           2.0 * A * c.L2 * c.L4 * c.L6 - A * A * c.L6 * c.L6;

    QuarticResult out;
    out.coeffs = c;
    out.roots = polynomial_roots({c.T4, c.T3, c.T2, c.T1, c.T0});

    auto restricted_br = [&](int n, const AttributeMatrix& A_) {
        return best_response(m, A_, n, 0);
    };
    auto unrestricted_br = [&](int n, const AttributeMatrix& A_) {
        const auto u = unrestricted_best_response(m, A_, n, 0);
        return u ? *u : -std::numeric_limits<double>::infinity();
    };

    struct Candidate {
        double a1, a2, residual;
    };
    std::vector<Candidate> candidates;
    auto consider = [&](double a1, double a2) {
        if (!std::isfinite(a1) || !std::isfinite(a2)) return;
        AttributeMatrix A_ = m.zero_attributes();
        A_.at(tp.node1, 0) = std::max(0.0, a1);
        A_.at(tp.node2, 0) = std::max(0.0, a2);
        const double res = is_nash_equilibrium(m, A_, 0).max_residual;
        candidates.push_back({A_.at(tp.node1, 0), A_.at(tp.node2, 0), res});
    };

    for (const auto& root : out.roots) {
        if (std::abs(root.imag()) > 1e-8 * (1.0 + std::abs(root.real()))) continue;
        const double a1 = root.real();
        if (a1 < -1e-9) continue;
        AttributeMatrix A_ = m.zero_attributes();
        A_.at(tp.node1, 0) = std::max(0.0, a1);
        consider(a1, restricted_br(tp.node2, A_));
    }
    {
        // Boundary procedure: one side clamped at zero.
        AttributeMatrix Z = m.zero_attributes();
        const double a1_of_zero = restricted_br(tp.node1, Z);
        AttributeMatrix A1 = m.zero_attributes();
        A1.at(tp.node1, 0) = a1_of_zero;
        if (unrestricted_br(tp.node2, A1) <= 0) consider(a1_of_zero, 0.0);
        const double a2_of_zero = restricted_br(tp.node2, Z);
        AttributeMatrix A2 = m.zero_attributes();
        A2.at(tp.node2, 0) = a2_of_zero;
        if (unrestricted_br(tp.node1, A2) <= 0) consider(0.0, a2_of_zero);
    }

    const Candidate* best = nullptr;
    for (const auto& cand : candidates)
        if (!best || cand.residual < best->residual) best = &cand;

    if (best && best->residual <= 1e-4) {
        out.a1_plus = best->a1;
        out.a2_plus = best->a2;
        out.residual = best->residual;
        return out;
    }

    // No transcription candidate verified; fall back to the damped
    // best-response iteration fixed point.
    AttributeMatrix A0 = m.zero_attributes();
    AttributeMatrix Af = damped_iteration(m, A0, 0.3, 1e-10, 200000);
    const double res = is_nash_equilibrium(m, Af, 0).max_residual;
    if (res > 1e-4) {
        std::ostringstream msg;
        msg << "quartic solver failure: best candidate residual "
            << (best ? best->residual : std::numeric_limits<double>::quiet_NaN())
            << ", iteration residual " << res << ", " << out.roots.size() << " roots";
        throw NumericError(msg.str());
    }
    out.a1_plus = Af.at(tp.node1, 0);
    out.a2_plus = Af.at(tp.node2, 0);
    out.residual = res;
    out.used_fallback = true;
    return out;
}

NbsGlobalResult nbs_global(const NetworkModel& m, int max_iters) {
    const int N = m.isp_count(), K = m.attribute_count();
    if (N * K > 12) throw ScopeError("nbs_global is restricted to |N|*|K| <= 12");
    std::vector<int> all;
    for (int n = 0; n < N; ++n) all.push_back(n);

    auto bound = [&](int n, int k, bool upper) {
        if (upper) {
            if (m.upper_bounds) {
                const double ub = m.upper_bounds->at(n, k);
                if (std::isfinite(ub)) return ub;
            }
            return 50.0;  // heuristic search box for unbounded attributes
        }
        if (m.lower_bounds) {
            const double lb = m.lower_bounds->at(n, k);
            if (std::isfinite(lb)) return lb;
        }
        return 0.0;
    };

    auto objective = [&](const AttributeMatrix& A) { return nash_product(m, A, all); };

    std::mt19937_64 rng(12345);
    std::vector<AttributeMatrix> starts;
    starts.push_back(m.zero_attributes());
    {
        AttributeMatrix mid(N, K);
        for (int n = 0; n < N; ++n)
            for (int k = 0; k < K; ++k)
                mid.at(n, k) = 0.5 * (bound(n, k, false) + std::min(bound(n, k, true), 10.0));
        starts.push_back(mid);
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int s = 0; s < 3; ++s) {
        AttributeMatrix A(N, K);
        for (int n = 0; n < N; ++n)
            for (int k = 0; k < K; ++k) {
                const double lo = bound(n, k, false);
                const double hi = std::min(bound(n, k, true), 10.0);
                A.at(n, k) = lo + unif(rng) * std::max(0.0, hi - lo);
            }
        starts.push_back(A);
    }

    AttributeMatrix best_A = starts[0];
    double best_P = -std::numeric_limits<double>::infinity();
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;

    for (AttributeMatrix A : starts) {
        m.clamp_to_bounds(A);
        double P = objective(A);
        for (int iter = 0; iter < max_iters; ++iter) {
            const double P_before = P;
            for (int n = 0; n < N; ++n) {
                for (int k = 0; k < K; ++k) {
                    const double lo = bound(n, k, false);
                    const double hi = bound(n, k, true);
                    // Coarse scan then golden-section refinement.
                    double ga = lo, gb = hi, gbest = A.at(n, k), fbest = P;
                    const int grid = 32;
                    for (int g = 0; g <= grid; ++g) {
                        const double x = lo + (hi - lo) * g / grid;
                        A.at(n, k) = x;
                        const double f = objective(A);
                        if (f > fbest) {
                            fbest = f;
                            gbest = x;
                        }
                    }
                    ga = std::max(lo, gbest - (hi - lo) / grid);
                    gb = std::min(hi, gbest + (hi - lo) / grid);
                    double cc = gb - gr * (gb - ga), ee = ga + gr * (gb - ga);
                    auto eval = [&](double x) {
                        A.at(n, k) = x;
                        return objective(A);
                    };
                    double fc = eval(cc), fe = eval(ee);
                    while (gb - ga > 1e-10) {
                        if (fc >= fe) {
                            gb = ee;
                            ee = cc;
                            fe = fc;
                            cc = gb - gr * (gb - ga);
                            fc = eval(cc);
                        } else {
                            ga = cc;
                            cc = ee;
                            fc = fe;
                            ee = ga + gr * (gb - ga);
                            fe = eval(ee);
                        }
                    }
                    const double mid = 0.5 * (ga + gb);
                    const double fm = eval(mid);
                    if (fm >= fbest) {
                        A.at(n, k) = mid;
                        P = fm;
                    } else {
                        A.at(n, k) = gbest;
                        P = fbest;
                    }
                }
            }
            if (P - P_before <= 1e-14 * (1.0 + std::abs(P))) break;
        }
        if (P > best_P) {
            best_P = P;
            best_A = A;
        }
    }

    NbsGlobalResult out;
    out.product = best_P;
    out.warning = !(best_P > 0);
    out.result.solver = SolverKind::NbsGlobal;
    out.result.attributes = best_A;
    out.result.path_valuations = valuations_of(m, best_A);
    out.result.residual = nbs_first_order_residual(m, best_A, all);
    out.result.unique_in_attributes = false;  // not established by the search
    return out;
}

CounterexampleConstruction construct_harm_counterexample(double d_r, double d_rbar,
                                                           double margin) {
    if (d_r <= 0 || d_rbar <= 0 || margin <= 0)
        throw ModelError("counterexample construction requires positive demands and margin");
    CounterexampleConstruction out;
    out.d_r = d_r;
    out.d_rbar = d_rbar;
    out.psi_rbar = 0.0;
    out.alpha_r0 = 0.0;
    out.alpha_rbar0 = d_rbar / d_r + margin;
    const double d = d_r + d_rbar;
    const double lo = (1.0 + out.alpha_r0) / std::sqrt(d_r);
    const double hi = (1.0 + out.alpha_r0 + out.alpha_rbar0) /
                      (std::sqrt(d) * std::sqrt(1.0 + out.alpha_rbar0));
    if (!(hi > lo))
        throw NumericError("counterexample interval empty; increase margin");
    out.psi_r = 0.5 * (lo + hi);

    // Isolated markets: each path alone with its own demand.
    const double v_r_n3 = std::max(out.alpha_r0, out.psi_r * std::sqrt(d_r) - 1.0);
    const double v_b_n3 = std::max(out.alpha_rbar0, out.psi_rbar * std::sqrt(d_rbar) - 1.0);
    out.V_N3 = v_r_n3 + v_b_n3;

    // Shared market with pooled demand.
    const double vhat_b = two_path_vhat_plus(out.psi_rbar, out.psi_r, d);
    const double vhat_r = two_path_vhat_plus(out.psi_r, out.psi_rbar, d);
    const double v_r_n4 =
        std::max(out.alpha_r0, vhat_star(out.psi_r, d, std::max(out.alpha_rbar0, vhat_b)));
    const double v_b_n4 =
        std::max(out.alpha_rbar0, vhat_star(out.psi_rbar, d, std::max(out.alpha_r0, vhat_r)));
    out.V_N4 = v_r_n4 + v_b_n4;
    out.delta_V = out.V_N4 - out.V_N3;
    return out;
}

DemandSweepResult pooling_demand_sweep(double psi_r, double psi_rbar, double alpha_r0,
                                      double alpha_rbar0, const std::vector<double>& d_grid) {
    if (psi_r <= 0 || psi_rbar <= 0)
        throw ModelError("demand sweep requires positive characteristic ratios");
    DemandSweepResult out;
    const double s = psi_r * psi_r + psi_rbar * psi_rbar;
    for (double d : d_grid) {
        DemandSweepRow row;
        row.d = d;
        const double dr_star = psi_r * psi_r / s * d;
        const double db_star = psi_rbar * psi_rbar / s * d;
        row.V_N3 = std::max(alpha_r0, psi_r * std::sqrt(dr_star) - 1.0) +
                   std::max(alpha_rbar0, psi_rbar * std::sqrt(db_star) - 1.0);
        const double vhat_b = two_path_vhat_plus(psi_rbar, psi_r, d);
        const double vhat_r = two_path_vhat_plus(psi_r, psi_rbar, d);
        row.V_N4 = std::max(alpha_r0, vhat_star(psi_r, d, std::max(alpha_rbar0, vhat_b))) +
                   std::max(alpha_rbar0, vhat_star(psi_rbar, d, std::max(alpha_r0, vhat_r)));
        out.rows.push_back(row);
    }
    // Crossover: the earliest grid point from which the pooled market
    // stays ahead for every larger demand (ties at small d, where both
    // sides clamp to the base valuations, do not count as a crossover).
    for (auto it = out.rows.rbegin(); it != out.rows.rend(); ++it) {
        if (it->V_N4 < it->V_N3 - 1e-12) break;
        out.first_crossover_d = it->d;
    }
    return out;
}

}  // namespace compsim
