#pragma once

#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace spde::detail {

// Gauss-Legendre rule mapped to [0,1].
struct UnitRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

template <unsigned N>
const UnitRule& unit_gauss_legendre() {
    static const UnitRule rule = [] {
        using G = boost::math::quadrature::gauss<double, N>;
        const auto& x = G::abscissa();
        const auto& w = G::weights();
        UnitRule r;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0.0) {
                r.nodes.push_back(0.5);
                r.weights.push_back(0.5 * w[i]);
                continue;
            }
            r.nodes.push_back(0.5 - 0.5 * x[i]);
            r.weights.push_back(0.5 * w[i]);
            r.nodes.push_back(0.5 + 0.5 * x[i]);
            r.weights.push_back(0.5 * w[i]);
        }
        return r;
    }();
    return rule;
}

} // namespace spde::detail
