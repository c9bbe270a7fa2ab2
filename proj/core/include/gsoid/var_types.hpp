#pragma once

#include "gsoid/graph_core.hpp"

#include <vector>

namespace gsoid {

/// Causal AR taps: block p (1-based) carries p+1 taps of Psi_p = H_p(W, h_p).
struct ArCoefficients {
    std::vector<Vector> blocks;

    ArCoefficients() = default;
    explicit ArCoefficients(std::vector<Vector> b);

    int p_order() const noexcept { return static_cast<int>(blocks.size()); }
    /// P(P+3)/2
    Eigen::Index total_size() const noexcept;
    /// h = [h_1; h_2; ...; h_P]
    Vector flatten() const;
    static ArCoefficients unflatten(const Vector& h, int p_order);
    static ArCoefficients zeros(int p_order);
};

constexpr Eigen::Index coefficient_count(int p_order) noexcept {
    return static_cast<Eigen::Index>(p_order) * (p_order + 3) / 2;
}

}  // namespace gsoid
