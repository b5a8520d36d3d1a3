// Core data types and evaluation primitives for the multi-attribute
// ISP-competition model: attribute matrices, paths, markets, ISP cost
// parameters, and the valuation / demand / profit functions built on them.
#ifndef COMPSIM_MODEL_HPP
#define COMPSIM_MODEL_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace compsim {

// Error taxonomy. ScopeError: an operation was asked to run outside its
// supported model class (e.g. closed form on a multi-market model).
// NumericError: a solver failed or hit a degenerate parameter set.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ScopeError : ModelError {
    using ModelError::ModelError;
};
struct NumericError : ModelError {
    using ModelError::ModelError;
};
struct ParseError : ModelError {
    using ModelError::ModelError;
};

enum class Tier { T1, T2, T3, Other, Unclassified };

std::string tier_name(Tier t);
Tier tier_from_name(const std::string& s);

enum class ValuationForm { Affine, SqrtAttribute };
enum class CostForm { Affine, QuadraticAttribute };

// |N| x |K| matrix of non-negative attribute values, row-major.
class AttributeMatrix {
  public:
    AttributeMatrix() = default;
    AttributeMatrix(int isps, int attrs, double fill = 0.0)
        : n_isps_(isps), n_attrs_(attrs),
          values_(static_cast<size_t>(isps) * attrs, fill) {}

    int isp_count() const { return n_isps_; }
    int attribute_count() const { return n_attrs_; }

    double& at(int n, int k) { return values_[idx(n, k)]; }
    double at(int n, int k) const { return values_[idx(n, k)]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool same_shape(const AttributeMatrix& o) const {
        return n_isps_ == o.n_isps_ && n_attrs_ == o.n_attrs_;
    }
    bool operator==(const AttributeMatrix& o) const {
        return n_isps_ == o.n_isps_ && n_attrs_ == o.n_attrs_ && values_ == o.values_;
    }

  private:
    size_t idx(int n, int k) const {
        return static_cast<size_t>(n) * n_attrs_ + k;
    }
    int n_isps_ = 0;
    int n_attrs_ = 0;
    std::vector<double> values_;
};

// One usable route: an ordered list of ISP indices plus the valuation
// parameters attached to it (base valuation and per-(isp,attribute)
// coefficients).
struct Path {
    std::string id;
    std::vector<int> isps;
    double base_valuation = 0.0;     // must be >= 0
    // coeffs[i][k] is the valuation coefficient of isps[i] for attribute k;
    // coefficients must be > 0 for every on-path (isp, attribute).
    std::vector<std::vector<double>> coeffs;

    double coeff_for(int isp, int k) const;  // 0 if isp not on path
    bool contains(int isp) const;
};

// An origin-destination pair with elastic demand and its usable paths
// (stored as indices into NetworkModel::paths).
struct Market {
    std::string source;
    std::string destination;
    double demand_limit = 0.0;
    std::vector<int> paths;
};

struct IspParams {
    std::string name;
    double rho = 0.0;     // revenue per traffic unit; rho >= phi0 is assumed
    double phi0 = 0.0;    // attribute-independent demand-dependent cost
    double gamma0 = 0.0;  // attribute-independent fixed cost
    std::vector<double> phi;    // per-attribute demand-dependent cost
    std::vector<double> gamma;  // per-attribute fixed cost
    Tier tier = Tier::Unclassified;
};

struct NetworkModel {
    std::vector<IspParams> isps;
    std::vector<std::string> attribute_names;
    std::vector<Path> paths;
    std::vector<Market> markets;
    ValuationForm valuation_form = ValuationForm::Affine;
    CostForm cost_form = CostForm::Affine;
    // Optional box constraints, enforced by solvers/dynamics (not by the
    // evaluation functions below). Infinite entries mean "unbounded".
    std::optional<AttributeMatrix> lower_bounds;
    std::optional<AttributeMatrix> upper_bounds;

    int isp_count() const { return static_cast<int>(isps.size()); }
    int attribute_count() const { return static_cast<int>(attribute_names.size()); }
    int path_index(const std::string& id) const;  // throws ModelError if unknown

    // Structural sanity: index ranges, coefficient presence/positivity,
    // bound consistency. Throws ModelError on violation.
    void validate() const;

    AttributeMatrix zero_attributes() const {
        return AttributeMatrix(isp_count(), attribute_count());
    }
    // Start state respecting lower bounds (zeros where unbounded).
    AttributeMatrix floor_attributes() const;
    // Clamp a matrix into [lower, upper] and >= 0, in place.
    void clamp_to_bounds(AttributeMatrix& A) const;
};

// g applied to attributes inside valuations (identity or sqrt).
double valuation_transform(ValuationForm form, double a);
// g applied to attributes inside cost terms (identity or square).
double cost_transform(CostForm form, double a);

// v_r(A): base valuation plus sum of on-path coefficient-weighted
// (transformed) attribute values.
double path_valuation(const NetworkModel& m, const AttributeMatrix& A, int path_index);
double path_valuation(const NetworkModel& m, const AttributeMatrix& A, const std::string& path_id);

// p_r = v_r / (1 + sum of market path valuations); always in [0, 1).
double selection_probability(const NetworkModel& m, const AttributeMatrix& A,
                             int market_index, int path_index);

// D_n: expected demand transported by ISP n over all markets. Exposed as
// the expectation only (the model's demand split is probabilistic; no
// realized split is defined).
double isp_demand(const NetworkModel& m, const AttributeMatrix& A, int n);

// pi_n = D_n * (rho - sum phi*g(a) - phi0) - sum gamma*g(a) - gamma0.
double profit(const NetworkModel& m, const AttributeMatrix& A, int n);

// Decomposition used by tests: profit == revenue - demand_cost - fixed_cost.
struct ProfitBreakdown {
    double revenue;
    double demand_dependent_cost;
    double demand_independent_cost;
    double total() const { return revenue - demand_dependent_cost - demand_independent_cost; }
};
ProfitBreakdown profit_breakdown(const NetworkModel& m, const AttributeMatrix& A, int n);

// V(A) = sum of all path valuations.
double aggregate_valuation(const NetworkModel& m, const AttributeMatrix& A);

// Product of profits over an ISP subset (factors may be negative).
double nash_product(const NetworkModel& m, const AttributeMatrix& A,
                    const std::vector<int>& isp_subset);

// Converts a price into its desirable "cheapness" counterpart p_max - price.
double cheapness_attribute(double price, double p_max);

// JSON (de)serialization of NetworkModel. Canonical form: objects with
// sorted keys, 2-space indent; infinite bound entries serialize as null.
std::string to_json_string(const NetworkModel& m);
NetworkModel model_from_json_string(const std::string& text);
NetworkModel load_model(const std::string& file_path);
void save_model(const NetworkModel& m, const std::string& file_path);

}  // namespace compsim

#endif  // COMPSIM_MODEL_HPP
