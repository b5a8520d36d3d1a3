// JSON (de)serialization for NetworkModel. The schema is documented in
// README.md; canonical output uses sorted object keys and 2-space indent
// so that round-trips are byte-stable.
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "compsim/model.hpp"

namespace compsim {

using nlohmann::json;

namespace {

json bounds_to_json(const AttributeMatrix& B) {
    json rows = json::array();
    for (int n = 0; n < B.isp_count(); ++n) {
        json row = json::array();
        for (int k = 0; k < B.attribute_count(); ++k) {
            const double v = B.at(n, k);
            if (std::isfinite(v))
                row.push_back(v);
            else
                row.push_back(nullptr);  // null encodes "unbounded"
        }
        rows.push_back(row);
    }
    return rows;
}

AttributeMatrix bounds_from_json(const json& j, double unbounded_value) {
    const int N = static_cast<int>(j.size());
    const int K = N > 0 ? static_cast<int>(j.at(0).size()) : 0;
    AttributeMatrix B(N, K);
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < K; ++k) {
            const auto& cell = j.at(n).at(k);
            B.at(n, k) = cell.is_null() ? unbounded_value : cell.get<double>();
        }
    return B;
}

std::string form_name(ValuationForm f) {
    return f == ValuationForm::SqrtAttribute ? "sqrt" : "affine";
}
std::string form_name(CostForm f) {
    return f == CostForm::QuadraticAttribute ? "quadratic" : "affine";
}

}  // namespace

std::string to_json_string(const NetworkModel& m) {
    json j;
    j["attributes"] = m.attribute_names;
    j["valuation_form"] = form_name(m.valuation_form);
    j["cost_form"] = form_name(m.cost_form);

    json isps = json::array();
    for (const auto& p : m.isps) {
        json ji;
        ji["name"] = p.name;
        ji["rho"] = p.rho;
        ji["phi0"] = p.phi0;
        ji["gamma0"] = p.gamma0;
        ji["phi"] = p.phi;
        ji["gamma"] = p.gamma;
        ji["tier"] = tier_name(p.tier);
        isps.push_back(ji);
    }
    j["isps"] = isps;

    json paths = json::array();
    for (const auto& r : m.paths) {
        json jr;
        jr["id"] = r.id;
        jr["isps"] = r.isps;
        jr["base_valuation"] = r.base_valuation;
        jr["coeffs"] = r.coeffs;
        paths.push_back(jr);
    }
    j["paths"] = paths;

    json markets = json::array();
    for (const auto& mk : m.markets) {
        json jm;
        jm["source"] = mk.source;
        jm["destination"] = mk.destination;
        jm["demand_limit"] = mk.demand_limit;
        json ids = json::array();
        for (int pi : mk.paths) ids.push_back(m.paths[pi].id);
        jm["paths"] = ids;
        markets.push_back(jm);
    }
    j["markets"] = markets;

    if (m.lower_bounds) j["lower_bounds"] = bounds_to_json(*m.lower_bounds);
    if (m.upper_bounds) j["upper_bounds"] = bounds_to_json(*m.upper_bounds);

    return j.dump(2);
}

NetworkModel model_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model JSON parse failure: ") + e.what());
    }
    NetworkModel m;
    try {
        m.attribute_names = j.at("attributes").get<std::vector<std::string>>();
        const std::string vf = j.value("valuation_form", "affine");
        const std::string cf = j.value("cost_form", "affine");
        if (vf == "affine")
            m.valuation_form = ValuationForm::Affine;
        else if (vf == "sqrt")
            m.valuation_form = ValuationForm::SqrtAttribute;
        else
            throw ParseError("unknown valuation_form: " + vf);
        if (cf == "affine")
            m.cost_form = CostForm::Affine;
        else if (cf == "quadratic")
            m.cost_form = CostForm::QuadraticAttribute;
        else
            throw ParseError("unknown cost_form: " + cf);

        for (const auto& ji : j.at("isps")) {
            IspParams p;
            p.name = ji.value("name", "");
            p.rho = ji.at("rho").get<double>();
            p.phi0 = ji.at("phi0").get<double>();
            p.gamma0 = ji.value("gamma0", 0.0);
            p.phi = ji.at("phi").get<std::vector<double>>();
            p.gamma = ji.at("gamma").get<std::vector<double>>();
            p.tier = tier_from_name(ji.value("tier", "Unclassified"));
            m.isps.push_back(std::move(p));
        }
        for (const auto& jr : j.at("paths")) {
            Path r;
            r.id = jr.at("id").get<std::string>();
            r.isps = jr.at("isps").get<std::vector<int>>();
            r.base_valuation = jr.value("base_valuation", 0.0);
            r.coeffs = jr.at("coeffs").get<std::vector<std::vector<double>>>();
            m.paths.push_back(std::move(r));
        }
        for (const auto& jm : j.at("markets")) {
            Market mk;
            mk.source = jm.value("source", "");
            mk.destination = jm.value("destination", "");
            mk.demand_limit = jm.at("demand_limit").get<double>();
            for (const auto& id : jm.at("paths"))
                mk.paths.push_back(m.path_index(id.get<std::string>()));
            m.markets.push_back(std::move(mk));
        }
        const double inf = std::numeric_limits<double>::infinity();
        if (j.contains("lower_bounds") && !j["lower_bounds"].is_null())
            m.lower_bounds = bounds_from_json(j["lower_bounds"], 0.0);
        if (j.contains("upper_bounds") && !j["upper_bounds"].is_null())
            m.upper_bounds = bounds_from_json(j["upper_bounds"], inf);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model JSON field error: ") + e.what());
    }
    m.validate();
    return m;
}

NetworkModel load_model(const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in) throw ParseError("cannot open model file: " + file_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json_string(ss.str());
}

void save_model(const NetworkModel& m, const std::string& file_path) {
    std::ofstream out(file_path);
    if (!out) throw ModelError("cannot write model file: " + file_path);
    out << to_json_string(m) << "\n";
}

}  // namespace compsim
