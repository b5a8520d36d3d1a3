// Shared builders for the unit tests.
#ifndef COMPSIM_TEST_UTIL_HPP
#define COMPSIM_TEST_UTIL_HPP

#include <string>
#include <vector>

#include "compsim/model.hpp"

namespace test_util {

// One market over `paths` disjoint single-attribute paths with
// `isps_per_path` ISPs each; every coefficient alpha, cost gamma,
// margin rho, demand d. phi defaults to zero.
inline compsim::NetworkModel simple_market(int paths, int isps_per_path, double alpha,
                                           double gamma, double rho, double d,
                                           double phi = 0.0, double base = 0.0) {
    compsim::NetworkModel m;
    m.attribute_names = {"q"};
    compsim::Market mk;
    mk.source = "s";
    mk.destination = "t";
    mk.demand_limit = d;
    for (int p = 0; p < paths; ++p) {
        compsim::Path path;
        path.id = "p" + std::to_string(p);
        path.base_valuation = base;
        for (int i = 0; i < isps_per_path; ++i) {
            compsim::IspParams isp;
            isp.name = "n" + std::to_string(m.isps.size());
            isp.rho = rho;
            isp.phi = {phi};
            isp.gamma = {gamma};
            path.isps.push_back(static_cast<int>(m.isps.size()));
            path.coeffs.push_back({alpha});
            m.isps.push_back(isp);
        }
        mk.paths.push_back(static_cast<int>(m.paths.size()));
        m.paths.push_back(path);
    }
    m.markets.push_back(mk);
    m.validate();
    return m;
}

}  // namespace test_util

#endif  // COMPSIM_TEST_UTIL_HPP
