#include "compsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace compsim {

std::string tier_name(Tier t) {
    switch (t) {
        case Tier::T1: return "T1";
        case Tier::T2: return "T2";
        case Tier::T3: return "T3";
        case Tier::Other: return "Other";
        default: return "Unclassified";
    }
}

Tier tier_from_name(const std::string& s) {
    if (s == "T1") return Tier::T1;
    if (s == "T2") return Tier::T2;
    if (s == "T3") return Tier::T3;
    if (s == "Other") return Tier::Other;
    if (s == "Unclassified") return Tier::Unclassified;
    throw ParseError("unknown tier name: " + s);
}

double Path::coeff_for(int isp, int k) const {
    for (size_t i = 0; i < isps.size(); ++i) {
        if (isps[i] == isp) return coeffs[i][k];
    }
    return 0.0;
}

bool Path::contains(int isp) const {
    return std::find(isps.begin(), isps.end(), isp) != isps.end();
}

int NetworkModel::path_index(const std::string& id) const {
    for (size_t i = 0; i < paths.size(); ++i) {
        if (paths[i].id == id) return static_cast<int>(i);
    }
    throw ModelError("unknown path id: " + id);
}

void NetworkModel::validate() const {
    const int N = isp_count();
    const int K = attribute_count();
    for (const auto& p : isps) {
        if (static_cast<int>(p.phi.size()) != K || static_cast<int>(p.gamma.size()) != K)
            throw ModelError("ISP cost vectors must have one entry per attribute");
        if (p.rho < p.phi0)
            throw ModelError("ISP parameter violation: rho < phi0 for " + p.name);
        if (p.rho < 0 || p.phi0 < 0 || p.gamma0 < 0)
            throw ModelError("negative attribute-independent parameter for " + p.name);
        for (int k = 0; k < K; ++k) {
            if (p.phi[k] < 0 || p.gamma[k] < 0)
                throw ModelError("negative cost coefficient for " + p.name);
        }
    }
    std::set<std::string> ids;
    for (const auto& r : paths) {
        if (r.isps.empty()) throw ModelError("path " + r.id + " has no ISPs");
        if (!ids.insert(r.id).second) throw ModelError("duplicate path id: " + r.id);
        if (r.base_valuation < 0)
            throw ModelError("negative base valuation on path " + r.id);
        std::set<int> seen;
        if (r.coeffs.size() != r.isps.size())
            throw ModelError("coefficient rows must match ISP list on path " + r.id);
        for (size_t i = 0; i < r.isps.size(); ++i) {
            const int n = r.isps[i];
            if (n < 0 || n >= N) throw ModelError("path " + r.id + " references unknown ISP");
            if (!seen.insert(n).second)
                throw ModelError("path " + r.id + " repeats ISP " + std::to_string(n));
            if (static_cast<int>(r.coeffs[i].size()) != K)
                throw ModelError("coefficient row size mismatch on path " + r.id);
            for (int k = 0; k < K; ++k) {
                if (!(r.coeffs[i][k] > 0))
                    throw ModelError("valuation coefficients must be positive on path " + r.id);
            }
        }
    }
    for (const auto& mk : markets) {
        if (mk.demand_limit < 0) throw ModelError("negative demand limit");
        for (int pi : mk.paths) {
            if (pi < 0 || pi >= static_cast<int>(paths.size()))
                throw ModelError("market references unknown path index");
        }
    }
    auto check_shape = [&](const std::optional<AttributeMatrix>& B, const char* which) {
        if (B && (B->isp_count() != N || B->attribute_count() != K))
            throw ModelError(std::string(which) + " bounds have wrong shape");
    };
    check_shape(lower_bounds, "lower");
    check_shape(upper_bounds, "upper");
    if (lower_bounds && upper_bounds) {
        for (int n = 0; n < N; ++n)
            for (int k = 0; k < K; ++k)
                if (lower_bounds->at(n, k) > upper_bounds->at(n, k))
                    throw ModelError("lower bound exceeds upper bound");
    }
}

AttributeMatrix NetworkModel::floor_attributes() const {
    AttributeMatrix A = zero_attributes();
    if (lower_bounds) {
        for (int n = 0; n < isp_count(); ++n)
            for (int k = 0; k < attribute_count(); ++k) {
                const double lb = lower_bounds->at(n, k);
                if (std::isfinite(lb) && lb > 0) A.at(n, k) = lb;
            }
    }
    return A;
}

void NetworkModel::clamp_to_bounds(AttributeMatrix& A) const {
    for (int n = 0; n < isp_count(); ++n) {
        for (int k = 0; k < attribute_count(); ++k) {
            double v = A.at(n, k);
            if (v < 0) v = 0;
            if (lower_bounds) {
                const double lb = lower_bounds->at(n, k);
                if (std::isfinite(lb) && v < lb) v = lb;
            }
            if (upper_bounds) {
                const double ub = upper_bounds->at(n, k);
                if (std::isfinite(ub) && v > ub) v = ub;
            }
            A.at(n, k) = v;
        }
    }
}

double valuation_transform(ValuationForm form, double a) {
    return form == ValuationForm::SqrtAttribute ? std::sqrt(a) : a;
}

double cost_transform(CostForm form, double a) {
    return form == CostForm::QuadraticAttribute ? a * a : a;
}

static void check_dims(const NetworkModel& m, const AttributeMatrix& A) {
    if (A.isp_count() != m.isp_count() || A.attribute_count() != m.attribute_count())
        throw ModelError("attribute matrix dimensions do not match model");
}

double path_valuation(const NetworkModel& m, const AttributeMatrix& A, int path_index) {
    check_dims(m, A);
    if (path_index < 0 || path_index >= static_cast<int>(m.paths.size()))
        throw ModelError("path index out of range");
    const Path& r = m.paths[path_index];
    double v = r.base_valuation;
    for (size_t i = 0; i < r.isps.size(); ++i) {
        const int n = r.isps[i];
        for (int k = 0; k < m.attribute_count(); ++k)
            v += r.coeffs[i][k] * valuation_transform(m.valuation_form, A.at(n, k));
    }
    return v;
}

double path_valuation(const NetworkModel& m, const AttributeMatrix& A, const std::string& path_id) {
    return path_valuation(m, A, m.path_index(path_id));
}

double selection_probability(const NetworkModel& m, const AttributeMatrix& A,
                             int market_index, int path_index) {
    if (market_index < 0 || market_index >= static_cast<int>(m.markets.size()))
        throw ModelError("market index out of range");
    const Market& mk = m.markets[market_index];
    if (std::find(mk.paths.begin(), mk.paths.end(), path_index) == mk.paths.end())
        throw ModelError("path is not part of this market");
    double total = 0.0;
    for (int pi : mk.paths) total += path_valuation(m, A, pi);
    return path_valuation(m, A, path_index) / (1.0 + total);
}

double isp_demand(const NetworkModel& m, const AttributeMatrix& A, int n) {
    check_dims(m, A);
    if (n < 0 || n >= m.isp_count()) throw ModelError("ISP index out of range");
    double D = 0.0;
    for (const auto& mk : m.markets) {
        if (mk.demand_limit <= 0 || mk.paths.empty()) continue;
        double total = 0.0;
        double mine = 0.0;
        for (int pi : mk.paths) {
            const double v = path_valuation(m, A, pi);
            total += v;
            if (m.paths[pi].contains(n)) mine += v;
        }
        if (mine > 0) D += mk.demand_limit * mine / (1.0 + total);
    }
    return D;
}

ProfitBreakdown profit_breakdown(const NetworkModel& m, const AttributeMatrix& A, int n) {
    const double D = isp_demand(m, A, n);
    const IspParams& p = m.isps[n];
    double phi_sum = p.phi0;
    double fixed = p.gamma0;
    for (int k = 0; k < m.attribute_count(); ++k) {
        const double g = cost_transform(m.cost_form, A.at(n, k));
        phi_sum += p.phi[k] * g;
        fixed += p.gamma[k] * g;
    }
    return ProfitBreakdown{D * p.rho, D * phi_sum, fixed};
}

double profit(const NetworkModel& m, const AttributeMatrix& A, int n) {
    const ProfitBreakdown b = profit_breakdown(m, A, n);
    return b.total();
}

double aggregate_valuation(const NetworkModel& m, const AttributeMatrix& A) {
    double V = 0.0;
    for (size_t i = 0; i < m.paths.size(); ++i)
        V += path_valuation(m, A, static_cast<int>(i));
    return V;
}

double nash_product(const NetworkModel& m, const AttributeMatrix& A,
                    const std::vector<int>& isp_subset) {
    if (isp_subset.empty()) throw ModelError("nash_product requires a non-empty subset");
    double prod = 1.0;
    for (int n : isp_subset) prod *= profit(m, A, n);
    return prod;
}

double cheapness_attribute(double price, double p_max) {
    if (price < 0 || p_max < 0 || price > p_max)
        throw ModelError("price must lie in [0, p_max]");
    return p_max - price;
}

}  // namespace compsim
