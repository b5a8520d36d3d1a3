#include "compsim/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace compsim {

bool closed_form_applicable(const NetworkModel& m) {
    return m.markets.size() == 1 && m.valuation_form == ValuationForm::Affine &&
           m.cost_form == CostForm::Affine;
}

static void require_closed_form(const NetworkModel& m) {
    if (m.markets.size() != 1)
        throw ScopeError("closed-form best response applies to single-market models only");
    if (m.valuation_form != ValuationForm::Affine || m.cost_form != CostForm::Affine)
        throw ScopeError("closed-form best response applies to affine forms only");
}

BestResponseContext best_response_context(const NetworkModel& m, const AttributeMatrix& A,
                                          int n, int k) {
    require_closed_form(m);
    const Market& mk = m.markets[0];
    BestResponseContext ctx;
    double total_valuation = 0.0;
    for (int pi : mk.paths) {
        const Path& r = m.paths[pi];
        const double v = path_valuation(m, A, pi);
        total_valuation += v;
        if (r.contains(n))
            ctx.alpha_nk_total += r.coeff_for(n, k);
        else
            ctx.v_minus_r_of_n += v;
    }
    ctx.v_minus_nk = total_valuation - ctx.alpha_nk_total * A.at(n, k);
    const IspParams& p = m.isps[n];
    ctx.phi_minus_nk = p.phi0;
    for (int k2 = 0; k2 < m.attribute_count(); ++k2)
        if (k2 != k) ctx.phi_minus_nk += p.phi[k2] * A.at(n, k2);
    return ctx;
}

std::optional<double> unrestricted_best_response(const NetworkModel& m,
                                                 const AttributeMatrix& A, int n, int k) {
    const BestResponseContext ctx = best_response_context(m, A, n, k);
    const Market& mk = m.markets[0];
    const IspParams& p = m.isps[n];
    const double d = mk.demand_limit;
    const double phi = p.phi[k];
    const double gamma = p.gamma[k];
    const double denom = d * phi + gamma;
    if (denom <= 0)
        throw NumericError("degenerate cost: d*phi_nk + gamma_nk = 0");
    const double alpha = ctx.alpha_nk_total;
    if (alpha <= 0)
        throw ScopeError("ISP is not on any market path; best response undefined");
    const double radicand = d * (1.0 + ctx.v_minus_r_of_n) / denom *
                            (phi * (1.0 + ctx.v_minus_nk) +
                             alpha * (p.rho - ctx.phi_minus_nk));
    if (radicand < 0) return std::nullopt;
    return (std::sqrt(radicand) - (1.0 + ctx.v_minus_nk)) / alpha;
}

BestResponseOutcome best_response_outcome(const NetworkModel& m, const AttributeMatrix& A,
                                          int n, int k) {
    BestResponseOutcome out;
    out.unrestricted = unrestricted_best_response(m, A, n, k);
    out.restricted = out.unrestricted ? std::max(0.0, *out.unrestricted) : 0.0;
    return out;
}

static double clamp_into_bounds(const NetworkModel& m, int n, int k, double a) {
    if (a < 0) a = 0;
    if (m.lower_bounds) {
        const double lb = m.lower_bounds->at(n, k);
        if (std::isfinite(lb) && a < lb) a = lb;
    }
    if (m.upper_bounds) {
        const double ub = m.upper_bounds->at(n, k);
        if (std::isfinite(ub) && a > ub) a = ub;
    }
    return a;
}

double best_response(const NetworkModel& m, const AttributeMatrix& A, int n, int k) {
    return clamp_into_bounds(m, n, k, best_response_outcome(m, A, n, k).restricted);
}

namespace {

// Profit of ISP n restricted to its decision variable a_nk, with every
// other value of A frozen. Precomputes per-market partial sums so each
// evaluation only touches markets that route through n.
class ProfitRestriction {
  public:
    ProfitRestriction(const NetworkModel& m, const AttributeMatrix& A, int n, int k)
        : vf_(m.valuation_form), cf_(m.cost_form) {
        const IspParams& p = m.isps[n];
        margin_base_ = p.rho - p.phi0;
        fixed_base_ = p.gamma0;
        for (int k2 = 0; k2 < m.attribute_count(); ++k2) {
            const double g = cost_transform(cf_, A.at(n, k2));
            if (k2 == k) continue;
            margin_base_ -= p.phi[k2] * g;
            fixed_base_ += p.gamma[k2] * g;
        }
        phi_k_ = p.phi[k];
        gamma_k_ = p.gamma[k];
        const double g_cur = valuation_transform(vf_, A.at(n, k));
        for (const auto& mk : m.markets) {
            if (mk.demand_limit <= 0) continue;
            MarketTerm t;
            t.d = mk.demand_limit;
            for (int pi : mk.paths) {
                const Path& r = m.paths[pi];
                const double v = path_valuation(m, A, pi);
                if (r.contains(n)) {
                    const double alpha = r.coeff_for(n, k);
                    t.mine.emplace_back(v - alpha * g_cur, alpha);
                } else {
                    t.rest += v;
                }
            }
            if (!t.mine.empty()) terms_.push_back(std::move(t));
        }
    }

    // No market routes through the ISP: profit is non-increasing in the
    // attribute (gamma_nk >= 0), so the smallest admissible value wins.
    bool trivial() const { return terms_.empty(); }

    double operator()(double a) const {
        const double gv = valuation_transform(vf_, a);
        const double gc = cost_transform(cf_, a);
        double D = 0.0;
        for (const auto& t : terms_) {
            double mine = 0.0;
            double total = t.rest;
            for (const auto& [vb, alpha] : t.mine) {
                const double v = vb + alpha * gv;
                mine += v;
                total += v;
            }
            D += t.d * mine / (1.0 + total);
        }
        return D * (margin_base_ - phi_k_ * gc) - (fixed_base_ + gamma_k_ * gc);
    }

  private:
    struct MarketTerm {
        double d = 0.0;
        double rest = 0.0;
        std::vector<std::pair<double, double>> mine;  // (valuation sans own term, alpha)
    };
    ValuationForm vf_;
    CostForm cf_;
    double margin_base_ = 0.0, fixed_base_ = 0.0, phi_k_ = 0.0, gamma_k_ = 0.0;
    std::vector<MarketTerm> terms_;
};

double default_search_max(const NetworkModel& m, const AttributeMatrix& A, int n, int k) {
    if (closed_form_applicable(m)) {
        const IspParams& p = m.isps[n];
        const double d = m.markets[0].demand_limit;
        if (d * p.phi[k] + p.gamma[k] > 0 && m.paths.size() > 0) {
            try {
                const auto a_hat = unrestricted_best_response(m, A, n, k);
                if (a_hat) return 10.0 * std::max(1.0, std::abs(*a_hat));
            } catch (const ModelError&) {
                // fall through to the generic default
            }
        }
    }
    return 1e4;
}

}  // namespace

double numeric_best_response(const NetworkModel& m, const AttributeMatrix& A, int n, int k,
                             double search_max, double step) {
    if (n < 0 || n >= m.isp_count() || k < 0 || k >= m.attribute_count())
        throw ModelError("numeric_best_response: index out of range");
    if (search_max <= 0) search_max = default_search_max(m, A, n, k);

    double lo = 0.0, hi = search_max;
    if (m.lower_bounds) {
        const double lb = m.lower_bounds->at(n, k);
        if (std::isfinite(lb)) lo = std::max(lo, lb);
    }
    if (m.upper_bounds) {
        const double ub = m.upper_bounds->at(n, k);
        if (std::isfinite(ub)) hi = std::min(hi, ub);
    }
    if (hi <= lo) return lo;

    const ProfitRestriction pi(m, A, n, k);
    if (pi.trivial()) return lo;  // profit independent of a_nk: smallest admissible value

    if (step <= 0) step = (hi - lo) / 1000.0;
    double best_a = lo;
    double best_v = pi(lo);
    const int steps = std::max(1, static_cast<int>(std::ceil((hi - lo) / step)));
    for (int i = 1; i <= steps; ++i) {
        const double a = std::min(hi, lo + i * step);
        const double v = pi(a);
        if (v > best_v) {
            best_v = v;
            best_a = a;
        }
    }

    // Golden-section refinement around the best grid point.
    double a_lo = std::max(lo, best_a - step);
    double a_hi = std::min(hi, best_a + step);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = a_hi - gr * (a_hi - a_lo);
    double d2 = a_lo + gr * (a_hi - a_lo);
    double fc = pi(c), fd = pi(d2);
    while (a_hi - a_lo > 1e-9) {
        if (fc >= fd) {
            a_hi = d2;
            d2 = c;
            fd = fc;
            c = a_hi - gr * (a_hi - a_lo);
            fc = pi(c);
        } else {
            a_lo = c;
            c = d2;
            fc = fd;
            d2 = a_lo + gr * (a_hi - a_lo);
            fd = pi(d2);
        }
    }
    const double refined = 0.5 * (a_lo + a_hi);
    const double f_ref = pi(refined);
    if (f_ref > best_v || (f_ref == best_v && refined < best_a)) return refined;
    return best_a;
}

double numeric_best_response_near(const NetworkModel& m, const AttributeMatrix& A, int n,
                                  int k, double hint) {
    if (n < 0 || n >= m.isp_count() || k < 0 || k >= m.attribute_count())
        throw ModelError("numeric_best_response_near: index out of range");
    double lo = 0.0, hi = 1e9;
    if (m.lower_bounds) {
        const double lb = m.lower_bounds->at(n, k);
        if (std::isfinite(lb)) lo = std::max(lo, lb);
    }
    if (m.upper_bounds) {
        const double ub = m.upper_bounds->at(n, k);
        if (std::isfinite(ub)) hi = std::min(hi, ub);
    }
    if (hi <= lo) return lo;

    const ProfitRestriction pi(m, A, n, k);
    if (pi.trivial()) return lo;

    double x = std::clamp(hint, lo, hi);
    double h = std::max(1e-4, 0.02 * std::max(1.0, std::abs(x)));
    double fx = pi(x);

    // Expand a bracket [a_lo, a_hi] containing a local maximum.
    double a_lo, a_hi;
    double up_x = std::min(hi, x + h);
    double dn_x = std::max(lo, x - h);
    double f_up = pi(up_x);
    double f_dn = pi(dn_x);
    if (f_up > fx && f_up >= f_dn) {
        double prev = x, cur = up_x, f_cur = f_up;
        for (;;) {
            if (cur >= hi) { a_lo = prev; a_hi = hi; break; }
            h *= 2.0;
            const double nxt = std::min(hi, cur + h);
            const double f_nxt = pi(nxt);
            if (f_nxt <= f_cur) { a_lo = prev; a_hi = nxt; break; }
            prev = cur;
            cur = nxt;
            f_cur = f_nxt;
        }
    } else if (f_dn > fx) {
        double prev = x, cur = dn_x, f_cur = f_dn;
        for (;;) {
            if (cur <= lo) { a_lo = lo; a_hi = prev; break; }
            h *= 2.0;
            const double nxt = std::max(lo, cur - h);
            const double f_nxt = pi(nxt);
            if (f_nxt <= f_cur) { a_lo = nxt; a_hi = prev; break; }
            prev = cur;
            cur = nxt;
            f_cur = f_nxt;
        }
    } else {
        a_lo = dn_x;
        a_hi = up_x;
    }

    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = a_hi - gr * (a_hi - a_lo);
    double d2 = a_lo + gr * (a_hi - a_lo);
    double fc = pi(c), fd = pi(d2);
    while (a_hi - a_lo > 1e-9) {
        if (fc >= fd) {
            a_hi = d2;
            d2 = c;
            fd = fc;
            c = a_hi - gr * (a_hi - a_lo);
            fc = pi(c);
        } else {
            a_lo = c;
            c = d2;
            fc = fd;
            d2 = a_lo + gr * (a_hi - a_lo);
            fd = pi(d2);
        }
    }
    const double refined = 0.5 * (a_lo + a_hi);
    return pi(refined) >= fx ? refined : x;
}

NashCheck is_nash_equilibrium(const NetworkModel& m, const AttributeMatrix& A, double tol) {
    NashCheck out;
    const bool closed = closed_form_applicable(m);
    std::vector<bool> active(m.isp_count(), false);
    for (const auto& mk : m.markets)
        for (int pi : mk.paths)
            for (int isp : m.paths[pi].isps) active[isp] = true;
    for (int n = 0; n < m.isp_count(); ++n) {
        for (int k = 0; k < m.attribute_count(); ++k) {
            if (!active[n]) continue;  // no demand flows through: no decision to verify
            double br;
            const IspParams& p = m.isps[n];
            const double d = m.markets.empty() ? 0.0 : m.markets[0].demand_limit;
            if (closed && d * p.phi[k] + p.gamma[k] > 0) {
                br = best_response(m, A, n, k);
            } else {
                br = numeric_best_response(m, A, n, k);
            }
            out.max_residual = std::max(out.max_residual, std::abs(A.at(n, k) - br));
        }
    }
    out.holds = out.max_residual <= tol;
    return out;
}

}  // namespace compsim
