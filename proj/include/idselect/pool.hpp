#pragma once

#include <string>
#include <vector>

#include "idselect/action.hpp"

namespace idselect {

// One pool entry: a frozen candidate model with its sequence-level cost and
// its synthetic recognition power (stands in for a real backbone's accuracy).
struct ModelSpec {
    std::string id;
    std::string modality;
    double cost_gflops = 0.0;     // > 0
    double discriminability = 0.0; // in (0, 1]
    int embed_dim = 0;             // metadata only
};

// Ordered candidate set for one modality. The ordering fixed here is the
// canonical index space for actions.
struct ModalityPool {
    std::string modality;
    std::vector<ModelSpec> models;
    int select_k = 1;
};

struct PoolSet {
    std::vector<ModalityPool> pools;

    const ModalityPool* find(const std::string& modality) const {
        for (const auto& p : pools)
            if (p.modality == modality) return &p;
        return nullptr;
    }
};

// All invariant violations, empty when valid.
std::vector<std::string> validate_poolset(const PoolSet& pools);

// Throws InvalidActionError on out-of-range or duplicate indices, or when a
// modality does not select exactly select_k models.
void validate_action(const ActionSet& action, const PoolSet& pools);

// Mean over modalities of (selected cost sum) / (sum of the select_k largest
// costs in that pool). In [0, 1]; for select_k = 1 this is cost / pool max.
double normalized_cost(const ActionSet& action, const PoolSet& pools);

// Sum of cost_gflops over all selected models.
double total_gflops(const ActionSet& action, const PoolSet& pools);

// Pools restricted to the named modalities, preserving pool order. Throws
// ConfigError on an unknown name or an empty selection.
PoolSet subset_pools(const PoolSet& pools, const std::vector<std::string>& modalities);

// Per pool, the select_k cheapest (respectively most expensive) model
// indices, cost ties broken toward the lower index; indices ascending.
std::vector<std::vector<int>> cheapest_picks(const PoolSet& pools);
std::vector<std::vector<int>> most_expensive_picks(const PoolSet& pools);

// Pool configuration from a JSON document:
//   {"modalities": [{"name": ..., "select_k": ..., "models":
//       [{"id":..., "cost_gflops":..., "discriminability":..., "embed_dim":...}, ...]}, ...]}
// Throws ConfigError on malformed input or invariant violations.
PoolSet pools_from_json(const std::string& text);
PoolSet load_pools(const std::string& path);

} // namespace idselect
