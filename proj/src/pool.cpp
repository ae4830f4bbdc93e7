#include "idselect/pool.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "idselect/errors.hpp"

namespace idselect {

std::vector<std::string> validate_poolset(const PoolSet& pools) {
    std::vector<std::string> errs;
    if (pools.pools.empty()) errs.push_back("poolset has no pools");
    std::set<std::string> seen_modalities;
    for (const auto& pool : pools.pools) {
        if (!seen_modalities.insert(pool.modality).second)
            errs.push_back("duplicate modality '" + pool.modality + "'");
        if (pool.models.empty())
            errs.push_back("pool '" + pool.modality + "' has no models");
        if (pool.select_k < 1)
            errs.push_back("pool '" + pool.modality + "' select_k must be positive");
        if (pool.select_k > static_cast<int>(pool.models.size()))
            errs.push_back("pool '" + pool.modality + "': select_k exceeds pool size");
        std::set<std::string> ids;
        for (const auto& m : pool.models) {
            if (!ids.insert(m.id).second)
                errs.push_back("pool '" + pool.modality + "': duplicate id '" + m.id + "'");
            if (!(m.cost_gflops > 0.0))
                errs.push_back("model '" + m.id + "': cost_gflops must be > 0");
            if (!(m.discriminability > 0.0 && m.discriminability <= 1.0))
                errs.push_back("model '" + m.id + "': discriminability must be in (0,1]");
            if (m.embed_dim <= 0)
                errs.push_back("model '" + m.id + "': embed_dim must be positive");
            if (m.modality != pool.modality)
                errs.push_back("model '" + m.id + "': modality tag '" + m.modality +
                               "' does not match pool '" + pool.modality + "'");
        }
    }
    return errs;
}

void validate_action(const ActionSet& action, const PoolSet& pools) {
    if (action.picks.size() != pools.pools.size())
        throw InvalidActionError("action covers " + std::to_string(action.picks.size()) +
                                 " modalities, pools have " + std::to_string(pools.pools.size()));
    for (size_t p = 0; p < pools.pools.size(); ++p) {
        const auto& pool = pools.pools[p];
        const auto& picks = action.picks[p];
        if (static_cast<int>(picks.size()) != pool.select_k)
            throw InvalidActionError("pool '" + pool.modality + "' expects " +
                                     std::to_string(pool.select_k) + " picks, got " +
                                     std::to_string(picks.size()));
        std::set<int> seen;
        for (int idx : picks) {
            if (idx < 0 || idx >= static_cast<int>(pool.models.size()))
                throw InvalidActionError("pool '" + pool.modality + "': index " +
                                         std::to_string(idx) + " out of range");
            if (!seen.insert(idx).second)
                throw InvalidActionError("pool '" + pool.modality + "': duplicate index " +
                                         std::to_string(idx));
        }
    }
}

namespace {

// Sum of the select_k largest costs in the pool.
double max_cost_sum(const ModalityPool& pool) {
    std::vector<double> costs;
    costs.reserve(pool.models.size());
    for (const auto& m : pool.models) costs.push_back(m.cost_gflops);
    std::sort(costs.begin(), costs.end(), std::greater<>());
    double sum = 0.0;
    for (int i = 0; i < pool.select_k; ++i) sum += costs[i];
    return sum;
}

} // namespace

double normalized_cost(const ActionSet& action, const PoolSet& pools) {
    validate_action(action, pools);
    double acc = 0.0;
    for (size_t p = 0; p < pools.pools.size(); ++p) {
        const auto& pool = pools.pools[p];
        double selected = 0.0;
        for (int idx : action.picks[p]) selected += pool.models[idx].cost_gflops;
        acc += selected / max_cost_sum(pool);
    }
    return acc / static_cast<double>(pools.pools.size());
}

double total_gflops(const ActionSet& action, const PoolSet& pools) {
    validate_action(action, pools);
    double sum = 0.0;
    for (size_t p = 0; p < pools.pools.size(); ++p)
        for (int idx : action.picks[p]) sum += pools.pools[p].models[idx].cost_gflops;
    return sum;
}

PoolSet subset_pools(const PoolSet& pools, const std::vector<std::string>& modalities) {
    if (modalities.empty()) throw ConfigError("subset_pools: empty modality list");
    PoolSet out;
    for (const auto& pool : pools.pools) {
        bool wanted = std::find(modalities.begin(), modalities.end(), pool.modality) !=
                      modalities.end();
        if (wanted) out.pools.push_back(pool);
    }
    for (const auto& name : modalities)
        if (!out.find(name)) throw ConfigError("subset_pools: no pool named '" + name + "'");
    return out;
}

namespace {

std::vector<std::vector<int>> picks_by_cost(const PoolSet& pools, bool expensive) {
    std::vector<std::vector<int>> picks;
    for (const auto& pool : pools.pools) {
        std::vector<int> order(pool.models.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            double ca = pool.models[a].cost_gflops;
            double cb = pool.models[b].cost_gflops;
            if (ca != cb) return expensive ? ca > cb : ca < cb;
            return a < b;
        });
        order.resize(pool.select_k);
        std::sort(order.begin(), order.end());
        picks.push_back(std::move(order));
    }
    return picks;
}

} // namespace

std::vector<std::vector<int>> cheapest_picks(const PoolSet& pools) {
    return picks_by_cost(pools, false);
}

std::vector<std::vector<int>> most_expensive_picks(const PoolSet& pools) {
    return picks_by_cost(pools, true);
}

PoolSet pools_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("pool config: ") + e.what());
    }
    PoolSet out;
    try {
        for (const auto& jpool : doc.at("modalities")) {
            ModalityPool pool;
            pool.modality = jpool.at("name").get<std::string>();
            pool.select_k = jpool.value("select_k", 1);
            for (const auto& jm : jpool.at("models")) {
                ModelSpec m;
                m.id = jm.at("id").get<std::string>();
                m.modality = pool.modality;
                m.cost_gflops = jm.at("cost_gflops").get<double>();
                m.discriminability = jm.at("discriminability").get<double>();
                m.embed_dim = jm.value("embed_dim", 128);
                pool.models.push_back(std::move(m));
            }
            out.pools.push_back(std::move(pool));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("pool config: ") + e.what());
    }
    auto errs = validate_poolset(out);
    if (!errs.empty()) {
        std::ostringstream oss;
        oss << "pool config invalid:";
        for (const auto& e : errs) oss << "\n  - " << e;
        throw ConfigError(oss.str());
    }
    return out;
}

PoolSet load_pools(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open pool config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return pools_from_json(buf.str());
}

} // namespace idselect
