// Model-instance construction: canonical theory topologies (homogeneous
// QxI markets, the N1-N4 comparison networks), AS-graph ingestion,
// valley-free path enumeration, gravity-model demand, tier
// classification, and the two-attribute parameter synthesis recipes.
#ifndef COMPSIM_NETGEN_HPP
#define COMPSIM_NETGEN_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "compsim/equilibrium.hpp"
#include "compsim/model.hpp"

namespace compsim {

// Synthetic per-node energy profile: mean transmission energy intensity
// (energy per traffic unit) and idle power draw.
struct EnergyProfile {
    double mean_energy_intensity = 0.0;
    double idle_power = 0.0;
};

struct AsNode {
    std::string id;
    double mass = 0.0;  // IP-count proxy; drives gravity and valuation weights
    std::optional<EnergyProfile> energy;
};

enum class AsRelation { CustomerToProvider, PeerToPeer };

// CustomerToProvider: `a` is the customer, `b` the provider.
// PeerToPeer: stored with a < b lexicographically.
struct AsEdge {
    std::string a;
    std::string b;
    AsRelation relation = AsRelation::PeerToPeer;
};

struct AsGraph {
    std::vector<AsNode> nodes;
    std::vector<AsEdge> edges;

    int node_index(const std::string& id) const;  // -1 if unknown
    const AsNode& node(const std::string& id) const;  // throws ModelError

    std::vector<std::string> providers_of(const std::string& id) const;
    std::vector<std::string> customers_of(const std::string& id) const;
    std::vector<std::string> peers_of(const std::string& id) const;

    // No self-edges, at most one relation per unordered pair, unique
    // node ids, non-negative masses. Throws ModelError.
    void validate() const;
};

// Text format: one edge per line, `<as_id> <as_id> <p2c|p2p> [mass_a mass_b]`,
// `#` starts a comment. For `a b p2c`, `a` is the provider of `b`.
// Throws ParseError with a line number on malformed input, ModelError on
// invariant violations (self-edge, conflicting duplicate relation).
AsGraph ingest_as_graph(const std::string& file_path);
AsGraph as_graph_from_string(const std::string& text);

// Optional JSON sidecar: object mapping AS id to
// {"mean_energy_intensity": x, "idle_power": y, "mass": m?}.
void load_node_sidecar(AsGraph& g, const std::string& file_path);

// Valley-free / export-policy compliance of an AS-id sequence: zero or
// more customer->provider steps, at most one peer step, then zero or
// more provider->customer steps; no repeated AS.
bool gao_rexford_compliant(const AsGraph& g, const std::vector<std::string>& path);

// Up to k shortest compliant paths from src to dst with at most
// max_hops ASes; shorter first, ties broken lexicographically by the
// AS-id sequence. Fewer than k results is not an error.
std::vector<std::vector<std::string>> enumerate_paths(const AsGraph& g,
                                                      const std::string& src,
                                                      const std::string& dst, int k,
                                                      int max_hops);

struct GravitySpec {
    double total_traffic = 170000.0;  // traffic units per accounting window
    double exponent = 2.0;            // distance exponent

    void validate() const;  // total_traffic > 0
};

struct PairDistance {
    std::string a;
    std::string b;
    double distance = 0.0;  // mean hop count of the pair's usable paths
};

// Gravity allocation: G = mass_a * mass_b / distance^exponent, demand =
// total_traffic * G / sum(G). Throws NumericError on a zero distance or
// an all-zero G vector.
std::map<std::pair<std::string, std::string>, double> gravity_demand(
    const AsGraph& g, const std::vector<PairDistance>& pairs, const GravitySpec& spec);

// T1: no provider. T2: all providers are T1. T3: all providers in
// {T1, T2}. Other: anything else.
std::map<std::string, Tier> tier_classify(const AsGraph& g);

// Iterative core extraction: repeatedly removes all minimum-degree
// nodes (simultaneously per iteration) until at most target_size nodes
// remain; the last iteration removes only the lexicographically
// smallest minimum-degree nodes needed to reach the target exactly.
AsGraph extract_core(const AsGraph& g, int target_size);

// Parameter constants for the two-attribute synthesis recipes. Monetary
// values are per accounting window; demand_to_mbps converts a demand
// unit into the bandwidth-attribute unit.
struct ParamProfile {
    double w = 0.17;                    // willingness-to-pay per traffic unit
    double bandwidth_cost_max = 94.0;   // gamma_n1 ~ Uniform(0, this)
    double p_co2 = 90.0;                // carbon price
    double g_clean_premium = 3.375;     // clean-energy price premium
    double rho = 0.104;                 // revenue per traffic unit
    uint64_t seed = 0;
    double carbon_intensity_max = 875.0;  // dirtiest-grid carbon intensity
    double demand_to_mbps = 1.0 / 328.5;  // traffic-unit -> bandwidth-unit
    // Log-uniform ranges for synthetic energy profiles.
    double energy_intensity_min = 2e-6, energy_intensity_max = 2e-5;
    double idle_power_min = 1.0, idle_power_max = 100.0;

    void validate() const;
};

// Fills in missing node energy profiles, log-uniform within the profile
// ranges; deterministic in (seed, sorted node ids).
void synthesize_energy_profiles(AsGraph& g, const ParamProfile& profile);

// One origin-destination market to be synthesized: demand plus its
// enumerated paths (AS-id sequences, shortest first).
struct MarketSpec {
    std::string src;
    std::string dst;
    double demand = 0.0;
    std::vector<std::vector<std::string>> paths;
};

// Builds the full two-attribute model (bandwidth + clean-energy share)
// from a graph and its markets:
//   alpha_rn1 = w / (|r| * mass_n); gamma_n1 ~ Uniform(0, max) seeded;
//   phi_n1 = 0; bandwidth lower bound = sum over n's markets of
//   0.1 * d_m / k_m (converted to bandwidth units);
//   alpha_rn2 = p_co2 * energy_intensity_n * carbon_intensity_max;
//   base valuation per path = (market max path alpha2-sum) - own sum;
//   phi_n2 = g * energy_intensity_n; gamma_n2 = g * idle_power_n;
//   clean-energy share bounded in [0, 1]; rho_n = profile.rho;
//   phi_n0 = gamma_n0 = 0; tiers from tier_classify.
// Throws ModelError on a zero-mass or profile-less on-path AS.
NetworkModel synthesize_params(const AsGraph& g, const std::vector<MarketSpec>& markets,
                               const ParamProfile& profile);

struct PipelineConfig {
    int k_paths = 5;
    int max_hops = 5;          // maximum ASes per path
    size_t min_paths = 1;      // drop pairs with fewer enumerated paths
    // Markets only between edge ASes (ASes without customers): traffic
    // originates at the network edge and transit tiers compete for it.
    bool edge_markets_only = false;
    GravitySpec gravity;
    ParamProfile profile;
};

// End-to-end pipeline: enumerate paths for every unordered pair (in the
// lexicographically smaller -> larger direction), keep pairs with at
// least min_paths usable paths, allocate gravity demand over them using
// mean hop count as the distance, then synthesize parameters.
NetworkModel build_from_graph(AsGraph g, const PipelineConfig& cfg);

// Homogeneous QxI market: one market of demand spec.d over Q disjoint
// paths of I identical ISPs each, one attribute.
NetworkModel build_homogeneous(const HomogeneousSpec& spec);

// N1: Q isolated single-path markets with demand d_prime each.
// N2: Q markets of demand d_prime, every market sharing all Q paths.
// reduced: the single-market model with d = d_prime * Q whose
// equilibrium coincides with N2's.
struct CompetitionPair {
    NetworkModel n1;
    NetworkModel n2;
    NetworkModel reduced;
};
CompetitionPair build_competition_pair_homogeneous(int Q, int I, double d_prime,
                                                   const HomogeneousSpec& params);

// Single-ISP path parameterization for the heterogeneous N3/N4 pair.
struct PathParams {
    double alpha1 = 1.0;
    double alpha0 = 0.0;
    double gamma1 = 1.0;
    double rho = 1.0;
    double phi0 = 0.0;
    double phi1 = 0.0;
    double gamma0 = 0.0;
};

// N3: two isolated single-path markets with demands (d_r, d_rbar).
// N4: one market with both paths and demand d_r + d_rbar.
struct TwoPathPair {
    NetworkModel n3;
    NetworkModel n4;
};
TwoPathPair build_two_path_pair(const PathParams& r, const PathParams& rbar, double d_r,
                                double d_rbar);

// Seeded three-level synthetic topology: a clique of t1 peering tier-1
// ASes, t2 multi-homed mid-tier ASes (with some peering), and t3
// multi-homed stub ASes. Masses are log-uniform per level.
AsGraph synthetic_hierarchical_graph(uint64_t seed, int t1 = 5, int t2 = 15, int t3 = 30);

}  // namespace compsim

#endif  // COMPSIM_NETGEN_HPP
