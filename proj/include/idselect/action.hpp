#pragma once

#include <vector>

namespace idselect {

// Joint selection of model indices, one list per modality pool, in pool
// order. Indices refer to the pool's construction-time model ordering.
// log_prob and entropy describe the sampling distribution that produced
// the action (zero for fixed combos).
struct ActionSet {
    std::vector<std::vector<int>> picks;
    double log_prob = 0.0;
    double entropy = 0.0;

    static ActionSet fixed(std::vector<std::vector<int>> indices) {
        ActionSet a;
        a.picks = std::move(indices);
        return a;
    }
};

} // namespace idselect
