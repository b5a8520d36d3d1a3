// Closed-form per-attribute best responses for single-market affine
// models, a numeric brute-force maximizer that works on any model, and
// Nash-equilibrium verification built on both.
#ifndef COMPSIM_BEST_RESPONSE_HPP
#define COMPSIM_BEST_RESPONSE_HPP

#include <optional>

#include "compsim/model.hpp"

namespace compsim {

// Shorthand quantities entering the closed-form best response, all
// computed from (model, A, n, k) against the model's single market:
//  - alpha_nk_total: summed valuation coefficient of (n,k) over the
//    market paths containing n,
//  - v_minus_r_of_n: total valuation of market paths not containing n,
//  - v_minus_nk: base valuations plus all coefficient-weighted attribute
//    terms except the (n,k) one,
//  - phi_minus_nk: demand-dependent unit cost of n excluding attribute k.
struct BestResponseContext {
    double alpha_nk_total = 0.0;
    double v_minus_r_of_n = 0.0;
    double v_minus_nk = 0.0;
    double phi_minus_nk = 0.0;
};

// The closed form applies to single-market models with affine valuation
// and cost forms; throws ScopeError otherwise.
bool closed_form_applicable(const NetworkModel& m);

BestResponseContext best_response_context(const NetworkModel& m, const AttributeMatrix& A,
                                          int n, int k);

struct BestResponseOutcome {
    std::optional<double> unrestricted;  // nullopt: undefined (negative radicand)
    double restricted = 0.0;             // max(0, unrestricted), 0 when undefined
};

// Optimal unrestricted attribute value; nullopt when the square-root
// argument is negative (in which case 0 is the restricted optimum).
// Throws ScopeError on multi-market models and NumericError when
// d*phi_nk + gamma_nk == 0.
std::optional<double> unrestricted_best_response(const NetworkModel& m,
                                                 const AttributeMatrix& A, int n, int k);

// Restricted best response: clamped to 0 and into the model's attribute
// bounds where present.
double best_response(const NetworkModel& m, const AttributeMatrix& A, int n, int k);

BestResponseOutcome best_response_outcome(const NetworkModel& m, const AttributeMatrix& A,
                                          int n, int k);

// Brute-force profit maximization of a_nk over [0, search_max]: coarse
// grid scan followed by golden-section refinement to interval width
// < 1e-9. Works on any model (multi-market, non-affine forms). Flat
// profiles tie-break to the smallest value. search_max <= 0 selects a
// default: 10x the closed-form scale where defined, else 1e4.
double numeric_best_response(const NetworkModel& m, const AttributeMatrix& A, int n, int k,
                             double search_max = -1.0, double step = -1.0);

// Local profit maximization of a_nk starting from a hint: expands a
// bracket around the hint and refines by golden section. Much cheaper
// than the grid scan when a good starting point is available (e.g. the
// previous iterate during dynamics); assumes the profit restriction is
// unimodal, which holds for the model families used here.
double numeric_best_response_near(const NetworkModel& m, const AttributeMatrix& A, int n,
                                  int k, double hint);

struct NashCheck {
    bool holds = false;
    double max_residual = 0.0;
};

// Residual = max over (n,k) of |a_nk - best response|, using the closed
// form where applicable and the numeric maximizer otherwise.
NashCheck is_nash_equilibrium(const NetworkModel& m, const AttributeMatrix& A, double tol);

}  // namespace compsim

#endif  // COMPSIM_BEST_RESPONSE_HPP
