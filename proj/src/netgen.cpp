#include "compsim/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace compsim {

// ---------------------------------------------------------------- AsGraph

int AsGraph::node_index(const std::string& id) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
}

const AsNode& AsGraph::node(const std::string& id) const {
    const int i = node_index(id);
    if (i < 0) throw ModelError("unknown AS id: " + id);
    return nodes[i];
}

std::vector<std::string> AsGraph::providers_of(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& e : edges)
        if (e.relation == AsRelation::CustomerToProvider && e.a == id) out.push_back(e.b);
    return out;
}

std::vector<std::string> AsGraph::customers_of(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& e : edges)
        if (e.relation == AsRelation::CustomerToProvider && e.b == id) out.push_back(e.a);
    return out;
}

std::vector<std::string> AsGraph::peers_of(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& e : edges) {
        if (e.relation != AsRelation::PeerToPeer) continue;
        if (e.a == id) out.push_back(e.b);
        if (e.b == id) out.push_back(e.a);
    }
    return out;
}

void AsGraph::validate() const {
    std::set<std::string> ids;
    for (const auto& n : nodes) {
        if (!ids.insert(n.id).second) throw ModelError("duplicate AS id: " + n.id);
        if (n.mass < 0) throw ModelError("negative mass on AS " + n.id);
        if (n.energy &&
            (n.energy->mean_energy_intensity < 0 || n.energy->idle_power < 0))
            throw ModelError("negative energy profile on AS " + n.id);
    }
    std::map<std::pair<std::string, std::string>, AsRelation> seen;
    for (const auto& e : edges) {
        if (e.a == e.b) throw ModelError("self-edge on AS " + e.a);
        if (!ids.count(e.a) || !ids.count(e.b))
            throw ModelError("edge references unknown AS " + e.a + "-" + e.b);
        auto key = std::minmax(e.a, e.b);
        auto [it, fresh] = seen.emplace(key, e.relation);
        if (!fresh)
            throw ModelError("multiple relations between " + key.first + " and " +
                             key.second);
    }
}

// ------------------------------------------------------------- ingestion

namespace {

// Returns an index, not a pointer: the nodes vector may reallocate.
int ensure_node(AsGraph& g, const std::string& id) {
    const int i = g.node_index(id);
    if (i >= 0) return i;
    g.nodes.push_back(AsNode{id, 0.0, std::nullopt});
    return static_cast<int>(g.nodes.size()) - 1;
}

AsGraph parse_graph(std::istream& in) {
    AsGraph g;
    // (unordered pair) -> (relation, provider id for p2c), to detect
    // conflicting duplicates while tolerating exact repeats.
    std::map<std::pair<std::string, std::string>, std::pair<AsRelation, std::string>> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string a, b, rel;
        if (!(ls >> a)) continue;  // blank line
        if (!(ls >> b >> rel))
            throw ParseError("line " + std::to_string(lineno) +
                             ": expected `<as> <as> <p2c|p2p> [mass mass]`");
        if (rel != "p2c" && rel != "p2p")
            throw ParseError("line " + std::to_string(lineno) + ": unknown relation `" +
                             rel + "`");
        if (a == b)
            throw ParseError("line " + std::to_string(lineno) + ": self-edge on AS " + a);
        double mass_a, mass_b;
        bool have_mass = false;
        if (ls >> mass_a) {
            if (!(ls >> mass_b))
                throw ParseError("line " + std::to_string(lineno) +
                                 ": masses must come in pairs");
            have_mass = true;
        }
        std::string extra;
        if (ls >> extra)
            throw ParseError("line " + std::to_string(lineno) + ": trailing token `" +
                             extra + "`");

        AsEdge e;
        if (rel == "p2c") {
            // `a b p2c`: a is the provider of b.
            e = AsEdge{b, a, AsRelation::CustomerToProvider};
        } else {
            auto [lo, hi] = std::minmax(a, b);
            e = AsEdge{lo, hi, AsRelation::PeerToPeer};
        }
        const auto key = std::minmax(a, b);
        const std::string provider = rel == "p2c" ? a : "";
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(key, std::make_pair(e.relation, provider));
            g.edges.push_back(e);
        } else if (it->second != std::make_pair(e.relation, provider)) {
            throw ParseError("line " + std::to_string(lineno) +
                             ": conflicting duplicate relation between " + a + " and " + b);
        }
        const int na = ensure_node(g, a);
        const int nb = ensure_node(g, b);
        if (have_mass) {
            g.nodes[na].mass = mass_a;
            g.nodes[nb].mass = mass_b;
        }
    }
    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const AsNode& x, const AsNode& y) { return x.id < y.id; });
    g.validate();
    return g;
}

}  // namespace

AsGraph ingest_as_graph(const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in) throw ParseError("cannot open AS-graph file: " + file_path);
    return parse_graph(in);
}

AsGraph as_graph_from_string(const std::string& text) {
    std::istringstream in(text);
    return parse_graph(in);
}

void load_node_sidecar(AsGraph& g, const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in) throw ParseError("cannot open sidecar file: " + file_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("sidecar JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("sidecar must be a JSON object keyed by AS id");
    for (const auto& [id, entry] : j.items()) {
        const int i = g.node_index(id);
        if (i < 0) throw ParseError("sidecar references unknown AS " + id);
        if (entry.contains("mass")) g.nodes[i].mass = entry.at("mass").get<double>();
        if (entry.contains("mean_energy_intensity") || entry.contains("idle_power")) {
            EnergyProfile p;
            p.mean_energy_intensity = entry.value("mean_energy_intensity", 0.0);
            p.idle_power = entry.value("idle_power", 0.0);
            g.nodes[i].energy = p;
        }
    }
    g.validate();
}

// --------------------------------------------------- path enumeration

namespace {

// Step classification along a->b: 1 = customer->provider (up),
// 0 = peer, -1 = provider->customer (down), -2 = no relation.
struct RelationTable {
    std::map<std::pair<std::string, std::string>, int> steps;

    explicit RelationTable(const AsGraph& g) {
        for (const auto& e : g.edges) {
            if (e.relation == AsRelation::PeerToPeer) {
                steps[{e.a, e.b}] = 0;
                steps[{e.b, e.a}] = 0;
            } else {
                steps[{e.a, e.b}] = 1;   // customer -> provider
                steps[{e.b, e.a}] = -1;  // provider -> customer
            }
        }
    }

    int step(const std::string& a, const std::string& b) const {
        auto it = steps.find({a, b});
        return it == steps.end() ? -2 : it->second;
    }
};

// Phase machine for valley-freeness: 0 = still climbing, 1 = after the
// (single) peer step, 2 = descending. Returns the next phase or -1.
int next_phase(int phase, int step) {
    if (step == -2) return -1;
    if (step == 1) return phase == 0 ? 0 : -1;
    if (step == 0) return phase == 0 ? 1 : -1;
    return 2;  // down step is always allowed
}

}  // namespace

bool gao_rexford_compliant(const AsGraph& g, const std::vector<std::string>& path) {
    if (path.empty()) return false;
    std::set<std::string> seen;
    for (const auto& id : path) {
        if (g.node_index(id) < 0) return false;
        if (!seen.insert(id).second) return false;
    }
    const RelationTable rel(g);
    int phase = 0;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        phase = next_phase(phase, rel.step(path[i], path[i + 1]));
        if (phase < 0) return false;
    }
    return true;
}

std::vector<std::vector<std::string>> enumerate_paths(const AsGraph& g,
                                                      const std::string& src,
                                                      const std::string& dst, int k,
                                                      int max_hops) {
    if (src == dst) throw ModelError("enumerate_paths: src and dst must differ");
    if (k < 1) throw ModelError("enumerate_paths: k must be >= 1");
    if (g.node_index(src) < 0 || g.node_index(dst) < 0)
        throw ModelError("enumerate_paths: unknown endpoint");
    const RelationTable rel(g);

    std::vector<std::string> ids;
    for (const auto& n : g.nodes) ids.push_back(n.id);

    std::vector<std::vector<std::string>> found;
    std::vector<std::string> cur{src};
    std::set<std::string> on_path{src};

    std::function<void(int)> dfs = [&](int phase) {
        // copy: push_back below may reallocate cur
        const std::string here = cur.back();
        if (here == dst) {
            found.push_back(cur);
            return;
        }
        if (static_cast<int>(cur.size()) >= max_hops) return;
        for (const auto& nxt : ids) {
            if (on_path.count(nxt)) continue;
            const int p2 = next_phase(phase, rel.step(here, nxt));
            if (p2 < 0) continue;
            cur.push_back(nxt);
            on_path.insert(nxt);
            dfs(p2);
            on_path.erase(nxt);
            cur.pop_back();
        }
    };
    dfs(0);

    std::sort(found.begin(), found.end(),
              [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
                  if (a.size() != b.size()) return a.size() < b.size();
                  return a < b;
              });
    if (static_cast<int>(found.size()) > k) found.resize(k);
    return found;
}

// ------------------------------------------------------------- gravity

void GravitySpec::validate() const {
    if (total_traffic <= 0) throw ModelError("total_traffic must be positive");
}

std::map<std::pair<std::string, std::string>, double> gravity_demand(
    const AsGraph& g, const std::vector<PairDistance>& pairs, const GravitySpec& spec) {
    spec.validate();
    std::map<std::pair<std::string, std::string>, double> gvals;
    double gsum = 0.0;
    for (const auto& p : pairs) {
        if (p.distance <= 0)
            throw NumericError("gravity distance must be positive for pair " + p.a + "-" +
                               p.b);
        const double gv = g.node(p.a).mass * g.node(p.b).mass /
                          std::pow(p.distance, spec.exponent);
        gvals[{p.a, p.b}] = gv;
        gsum += gv;
    }
    if (gsum <= 0) throw NumericError("gravity allocation undefined: all masses zero");
    for (auto& [key, v] : gvals) v = spec.total_traffic * v / gsum;
    return gvals;
}

// ---------------------------------------------------------------- tiers

std::map<std::string, Tier> tier_classify(const AsGraph& g) {
    std::map<std::string, std::vector<std::string>> providers;
    for (const auto& n : g.nodes) providers[n.id] = g.providers_of(n.id);

    std::map<std::string, Tier> tier;
    for (const auto& n : g.nodes) tier[n.id] = Tier::Unclassified;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& n : g.nodes) {
            const auto& provs = providers[n.id];
            Tier t;
            if (provs.empty()) {
                t = Tier::T1;
            } else {
                bool all_t1 = true, all_t12 = true, any_unclassified = false;
                for (const auto& p : provs) {
                    const Tier pt = tier[p];
                    if (pt == Tier::Unclassified) any_unclassified = true;
                    if (pt != Tier::T1) all_t1 = false;
                    if (pt != Tier::T1 && pt != Tier::T2) all_t12 = false;
                }
                if (any_unclassified)
                    continue;  // provider tiers not settled yet
                else if (all_t1)
                    t = Tier::T2;
                else if (all_t12)
                    t = Tier::T3;
                else
                    t = Tier::Other;
            }
            if (tier[n.id] != t) {
                tier[n.id] = t;
                changed = true;
            }
        }
    }
    // Provider cycles never settle; they are outside the strict hierarchy.
    for (auto& [id, t] : tier)
        if (t == Tier::Unclassified) t = Tier::Other;
    return tier;
}

AsGraph extract_core(const AsGraph& g, int target_size) {
    if (target_size < 0) throw ModelError("extract_core: target must be >= 0");
    AsGraph cur = g;
    while (static_cast<int>(cur.nodes.size()) > target_size) {
        std::map<std::string, int> degree;
        for (const auto& n : cur.nodes) degree[n.id] = 0;
        for (const auto& e : cur.edges) {
            ++degree[e.a];
            ++degree[e.b];
        }
        int min_deg = std::numeric_limits<int>::max();
        for (const auto& [id, d] : degree) min_deg = std::min(min_deg, d);
        std::vector<std::string> victims;
        for (const auto& n : cur.nodes)  // nodes are kept sorted by id
            if (degree[n.id] == min_deg) victims.push_back(n.id);
        const size_t excess = cur.nodes.size() - static_cast<size_t>(target_size);
        if (victims.size() > excess) victims.resize(excess);
        const std::set<std::string> gone(victims.begin(), victims.end());
        std::erase_if(cur.nodes, [&](const AsNode& n) { return gone.count(n.id) > 0; });
        std::erase_if(cur.edges, [&](const AsEdge& e) {
            return gone.count(e.a) > 0 || gone.count(e.b) > 0;
        });
    }
    return cur;
}

// --------------------------------------------------- parameter synthesis

void ParamProfile::validate() const {
    if (w <= 0 || bandwidth_cost_max <= 0 || p_co2 <= 0 || g_clean_premium <= 0 ||
        rho <= 0 || carbon_intensity_max <= 0 || demand_to_mbps <= 0)
        throw ModelError("ParamProfile constants must be positive");
    if (energy_intensity_min <= 0 || energy_intensity_max < energy_intensity_min ||
        idle_power_min <= 0 || idle_power_max < idle_power_min)
        throw ModelError("ParamProfile synthesis ranges must be positive and ordered");
}

void synthesize_energy_profiles(AsGraph& g, const ParamProfile& profile) {
    profile.validate();
    std::vector<size_t> order(g.nodes.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return g.nodes[a].id < g.nodes[b].id; });
    std::mt19937_64 rng(profile.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) {
        return lo * std::exp(u(rng) * std::log(hi / lo));
    };
    for (size_t i : order) {
        // Always draw both values so presence of profiles elsewhere does
        // not shift the stream for later nodes.
        const double e = log_uniform(profile.energy_intensity_min,
                                     profile.energy_intensity_max);
        const double idle = log_uniform(profile.idle_power_min, profile.idle_power_max);
        if (!g.nodes[i].energy) g.nodes[i].energy = EnergyProfile{e, idle};
    }
}

NetworkModel synthesize_params(const AsGraph& g, const std::vector<MarketSpec>& markets,
                               const ParamProfile& profile) {
    profile.validate();
    g.validate();

    // The model's ISPs are exactly the on-path ASes, sorted by id.
    std::set<std::string> on_path;
    for (const auto& mk : markets) {
        if (mk.src == mk.dst) throw ModelError("market endpoints must differ");
        if (mk.paths.empty())
            throw ModelError("market " + mk.src + "-" + mk.dst + " has no paths");
        if (mk.demand < 0) throw ModelError("negative market demand");
        for (const auto& path : mk.paths)
            for (const auto& id : path) on_path.insert(id);
    }
    std::vector<std::string> isp_ids(on_path.begin(), on_path.end());
    std::map<std::string, int> isp_index;
    for (size_t i = 0; i < isp_ids.size(); ++i)
        isp_index[isp_ids[i]] = static_cast<int>(i);

    NetworkModel m;
    m.attribute_names = {"bandwidth", "clean_energy_share"};
    std::mt19937_64 rng(profile.seed);
    std::uniform_real_distribution<double> u_gamma(0.0, profile.bandwidth_cost_max);
    const auto tiers = tier_classify(g);
    for (const auto& id : isp_ids) {
        const AsNode& node = g.node(id);
        if (node.mass <= 0) throw ModelError("on-path AS " + id + " has zero mass");
        if (!node.energy)
            throw ModelError("on-path AS " + id + " has no energy profile");
        IspParams p;
        p.name = id;
        p.rho = profile.rho;
        p.phi0 = 0.0;
        p.gamma0 = 0.0;
        p.phi = {0.0, profile.g_clean_premium * node.energy->mean_energy_intensity};
        p.gamma = {u_gamma(rng), profile.g_clean_premium * node.energy->idle_power};
        p.tier = tiers.at(id);
        m.isps.push_back(std::move(p));
    }

    AttributeMatrix lower(static_cast<int>(isp_ids.size()), 2, 0.0);
    AttributeMatrix upper(static_cast<int>(isp_ids.size()), 2,
                          std::numeric_limits<double>::infinity());
    for (int n = 0; n < lower.isp_count(); ++n) upper.at(n, 1) = 1.0;

    for (const auto& mk : markets) {
        Market market;
        market.source = mk.src;
        market.destination = mk.dst;
        market.demand_limit = mk.demand;

        // Carbon sums per path, for the per-market base-valuation
        // normalization (all paths valued identically at full clean share,
        // never negatively).
        std::vector<double> carbon_sum;
        for (const auto& path : mk.paths) {
            double s = 0.0;
            for (const auto& id : path)
                s += profile.p_co2 * profile.carbon_intensity_max *
                     g.node(id).energy->mean_energy_intensity;
            carbon_sum.push_back(s);
        }
        const double carbon_max = *std::max_element(carbon_sum.begin(), carbon_sum.end());

        for (size_t pi = 0; pi < mk.paths.size(); ++pi) {
            const auto& ids = mk.paths[pi];
            Path path;
            path.id = mk.src + ">" + mk.dst + "#" + std::to_string(pi);
            path.base_valuation = carbon_max - carbon_sum[pi];
            for (const auto& id : ids) {
                const int n = isp_index.at(id);
                const AsNode& node = g.node(id);
                path.isps.push_back(n);
                path.coeffs.push_back(
                    {profile.w / (static_cast<double>(ids.size()) * node.mass),
                     profile.p_co2 * profile.carbon_intensity_max *
                         node.energy->mean_energy_intensity});
            }
            market.paths.push_back(static_cast<int>(m.paths.size()));
            m.paths.push_back(std::move(path));

            // Bandwidth floor: each on-path ISP must provision a 0.1/k
            // share of the market's demand, converted to bandwidth units.
            for (const auto& id : ids)
                lower.at(isp_index.at(id), 0) += 0.1 * mk.demand /
                                                 static_cast<double>(mk.paths.size()) *
                                                 profile.demand_to_mbps;
        }
        m.markets.push_back(std::move(market));
    }

    m.lower_bounds = std::move(lower);
    m.upper_bounds = std::move(upper);
    m.validate();
    return m;
}

NetworkModel build_from_graph(AsGraph g, const PipelineConfig& cfg) {
    g.validate();
    synthesize_energy_profiles(g, cfg.profile);

    struct Pending {
        std::string a, b;
        std::vector<std::vector<std::string>> paths;
        double mean_hops = 0.0;
    };
    std::vector<Pending> pending;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        for (size_t j = i + 1; j < g.nodes.size(); ++j) {
            const std::string& a = g.nodes[i].id;
            const std::string& b = g.nodes[j].id;
            auto paths = enumerate_paths(g, a, b, cfg.k_paths, cfg.max_hops);
            if (paths.size() < cfg.min_paths || paths.empty()) continue;
            double hops = 0.0;
            for (const auto& p : paths) hops += static_cast<double>(p.size()) - 1.0;
            const double mean_hops = hops / static_cast<double>(paths.size());
            pending.push_back(Pending{a, b, std::move(paths), mean_hops});
        }
    }
    if (pending.empty()) throw ModelError("no AS pair has a usable path");

    std::vector<PairDistance> dists;
    for (const auto& p : pending) dists.push_back({p.a, p.b, p.mean_hops});
    const auto demand = gravity_demand(g, dists, cfg.gravity);

    std::vector<MarketSpec> markets;
    for (auto& p : pending)
        markets.push_back(
            MarketSpec{p.a, p.b, demand.at({p.a, p.b}), std::move(p.paths)});
    NetworkModel m = synthesize_params(g, markets, cfg.profile);

    if (cfg.edge_markets_only) {
        // Keep only markets between edge ASes (ASes without customers):
        // traffic originates and terminates at the network edge and the
        // transit tiers compete for it. Parameters and bandwidth floors
        // stay as synthesized from the all-pair load (ASes still carry
        // the background traffic); the retained markets are scaled back
        // up to the full traffic volume.
        std::set<std::string> has_customer;
        for (const auto& e : g.edges)
            if (e.relation == AsRelation::CustomerToProvider)
                has_customer.insert(e.b);
        double total = 0.0, kept = 0.0;
        std::vector<Market> edge_markets;
        for (const auto& mk : m.markets) {
            total += mk.demand_limit;
            if (has_customer.count(mk.source) || has_customer.count(mk.destination))
                continue;
            edge_markets.push_back(mk);
            kept += mk.demand_limit;
        }
        if (edge_markets.empty() || kept <= 0)
            throw ModelError("no usable market between edge ASes");
        for (auto& mk : edge_markets) mk.demand_limit *= total / kept;
        m.markets = std::move(edge_markets);
        m.validate();
    }
    return m;
}

// -------------------------------------------------- canonical builders

NetworkModel build_homogeneous(const HomogeneousSpec& spec) {
    spec.validate();
    NetworkModel m;
    m.attribute_names = {"quality"};
    Market market;
    market.source = "src";
    market.destination = "dst";
    market.demand_limit = spec.d;
    for (int q = 0; q < spec.Q; ++q) {
        Path path;
        path.id = "path_" + std::to_string(q);
        path.base_valuation = spec.alpha0;
        for (int i = 0; i < spec.I; ++i) {
            IspParams p;
            p.name = "isp_" + std::to_string(q) + "_" + std::to_string(i);
            p.rho = spec.rho;
            p.phi0 = spec.phi0;
            p.phi = {spec.phi1};
            p.gamma = {spec.gamma1};
            path.isps.push_back(static_cast<int>(m.isps.size()));
            path.coeffs.push_back({spec.alpha1});
            m.isps.push_back(std::move(p));
        }
        market.paths.push_back(static_cast<int>(m.paths.size()));
        m.paths.push_back(std::move(path));
    }
    m.markets.push_back(std::move(market));
    m.validate();
    return m;
}

CompetitionPair build_competition_pair_homogeneous(int Q, int I, double d_prime,
                                                   const HomogeneousSpec& params) {
    HomogeneousSpec base = params;
    base.Q = Q;
    base.I = I;
    base.d = d_prime * Q;
    base.validate();

    CompetitionPair out;
    out.reduced = build_homogeneous(base);

    // Shared ISP/path structure for N1 and N2.
    NetworkModel shape = out.reduced;
    shape.markets.clear();
    for (int q = 0; q < Q; ++q) {
        Market mk;
        mk.source = "src_" + std::to_string(q);
        mk.destination = "dst_" + std::to_string(q);
        mk.demand_limit = d_prime;
        mk.paths = {q};
        shape.markets.push_back(std::move(mk));
    }
    out.n1 = shape;
    out.n1.validate();

    for (auto& mk : shape.markets) {
        mk.paths.clear();
        for (int q = 0; q < Q; ++q) mk.paths.push_back(q);
    }
    out.n2 = std::move(shape);
    out.n2.validate();
    return out;
}

namespace {

void append_single_isp_path(NetworkModel& m, const std::string& tag, const PathParams& p) {
    IspParams isp;
    isp.name = "isp_" + tag;
    isp.rho = p.rho;
    isp.phi0 = p.phi0;
    isp.gamma0 = p.gamma0;
    isp.phi = {p.phi1};
    isp.gamma = {p.gamma1};

    Path path;
    path.id = tag;
    path.base_valuation = p.alpha0;
    path.isps = {static_cast<int>(m.isps.size())};
    path.coeffs = {{p.alpha1}};

    m.isps.push_back(std::move(isp));
    m.paths.push_back(std::move(path));
}

}  // namespace

TwoPathPair build_two_path_pair(const PathParams& r, const PathParams& rbar, double d_r,
                                double d_rbar) {
    if (d_r <= 0 || d_rbar <= 0) throw ModelError("demands must be positive");
    NetworkModel base;
    base.attribute_names = {"quality"};
    append_single_isp_path(base, "r", r);
    append_single_isp_path(base, "rbar", rbar);

    TwoPathPair out;
    out.n3 = base;
    Market mr;
    mr.source = "src_r";
    mr.destination = "dst_r";
    mr.demand_limit = d_r;
    mr.paths = {0};
    Market mb;
    mb.source = "src_rbar";
    mb.destination = "dst_rbar";
    mb.demand_limit = d_rbar;
    mb.paths = {1};
    out.n3.markets = {mr, mb};
    out.n3.validate();

    out.n4 = std::move(base);
    Market shared;
    shared.source = "src";
    shared.destination = "dst";
    shared.demand_limit = d_r + d_rbar;
    shared.paths = {0, 1};
    out.n4.markets = {shared};
    out.n4.validate();
    return out;
}

AsGraph synthetic_hierarchical_graph(uint64_t seed, int t1, int t2, int t3) {
    if (t1 < 1 || t2 < 0 || t3 < 0)
        throw ModelError("synthetic graph needs at least one tier-1 AS");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) {
        return lo * std::exp(u(rng) * std::log(hi / lo));
    };
    auto pad = [](int i) {
        std::ostringstream os;
        os << (i < 10 ? "0" : "") << i;
        return os.str();
    };

    AsGraph g;
    std::vector<std::string> l1, l2, l3;
    for (int i = 0; i < t1; ++i) {
        l1.push_back("t1_" + pad(i));
        g.nodes.push_back(AsNode{l1.back(), log_uniform(0.2, 1.0), std::nullopt});
    }
    for (int i = 0; i < t2; ++i) {
        l2.push_back("t2_" + pad(i));
        g.nodes.push_back(AsNode{l2.back(), log_uniform(0.05, 0.5), std::nullopt});
    }
    for (int i = 0; i < t3; ++i) {
        l3.push_back("t3_" + pad(i));
        g.nodes.push_back(AsNode{l3.back(), log_uniform(0.02, 0.2), std::nullopt});
    }
    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const AsNode& a, const AsNode& b) { return a.id < b.id; });

    // Tier-1 clique of peers.
    for (size_t i = 0; i < l1.size(); ++i)
        for (size_t j = i + 1; j < l1.size(); ++j)
            g.edges.push_back(AsEdge{l1[i], l1[j], AsRelation::PeerToPeer});

    auto pick_distinct = [&](const std::vector<std::string>& pool, size_t count) {
        std::vector<std::string> chosen = pool;
        std::shuffle(chosen.begin(), chosen.end(), rng);
        chosen.resize(std::min(count, chosen.size()));
        return chosen;
    };

    // Mid-tier ASes: three tier-1 providers each plus sparse peering.
    for (const auto& id : l2)
        for (const auto& prov : pick_distinct(l1, 3))
            g.edges.push_back(AsEdge{id, prov, AsRelation::CustomerToProvider});
    for (size_t i = 0; i < l2.size(); ++i)
        for (size_t j = i + 1; j < l2.size(); ++j)
            if (u(rng) < 0.25)
                g.edges.push_back(AsEdge{l2[i], l2[j], AsRelation::PeerToPeer});

    // Stub ASes: two mid-tier providers each plus rare peering.
    for (const auto& id : l3)
        for (const auto& prov : pick_distinct(l2, 2))
            g.edges.push_back(AsEdge{id, prov, AsRelation::CustomerToProvider});
    for (size_t i = 0; i < l3.size(); ++i)
        for (size_t j = i + 1; j < l3.size(); ++j)
            if (u(rng) < 0.05)
                g.edges.push_back(AsEdge{l3[i], l3[j], AsRelation::PeerToPeer});

    g.validate();
    return g;
}

}  // namespace compsim
