// Pool construction, cost accounting, and the JSON interface. Numeric
// expectations are frozen from direct arithmetic over the configured costs.

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "idselect/errors.hpp"
#include "idselect/pool.hpp"
#include "idselect/rng.hpp"

using namespace idselect;

namespace {

ModelSpec model(const std::string& id, const std::string& modality, double cost,
                double disc = 0.5) {
    ModelSpec m;
    m.id = id;
    m.modality = modality;
    m.cost_gflops = cost;
    m.discriminability = disc;
    m.embed_dim = 128;
    return m;
}

ModalityPool pool(const std::string& modality, std::vector<double> costs, int select_k = 1) {
    ModalityPool p;
    p.modality = modality;
    p.select_k = select_k;
    for (size_t i = 0; i < costs.size(); ++i)
        p.models.push_back(model(modality + "_" + std::to_string(i), modality, costs[i]));
    return p;
}

// Reference pools: costs match the published per-model GFLOPs table.
PoolSet reference_pools() {
    PoolSet ps;
    ps.pools.push_back(pool("face", {5.2, 12.7, 24.3}));
    ps.pools.push_back(pool("gait", {6.5, 71.0, 669.3}));
    ps.pools.push_back(pool("body", {7.6, 8.5, 12.5}));
    return ps;
}

} // namespace

TEST_CASE("normalized_cost single-pool ratios") {
    PoolSet ps;
    ps.pools.push_back(pool("face", {5.2, 12.7, 24.3}));

    CHECK(normalized_cost(ActionSet::fixed({{2}}), ps) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normalized_cost(ActionSet::fixed({{0}}), ps) ==
          doctest::Approx(0.2139917695473251).epsilon(1e-12));
}

TEST_CASE("normalized_cost averages per-modality ratios") {
    auto ps = reference_pools();
    double got = normalized_cost(ActionSet::fixed({{0}, {0}, {0}}), ps);
    CHECK(got == doctest::Approx(0.27723446952439096).epsilon(1e-12));

    // every modality at its maximum
    CHECK(normalized_cost(ActionSet::fixed({{2}, {2}, {2}}), ps) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalized_cost for select_k=2 uses the k most expensive as the denominator") {
    PoolSet ps;
    ps.pools.push_back(pool("body", {7.6, 8.5, 12.5, 48.2}, 2));
    // denominator = 12.5 + 48.2
    CHECK(normalized_cost(ActionSet::fixed({{2, 3}}), ps) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normalized_cost(ActionSet::fixed({{0, 1}}), ps) ==
          doctest::Approx((7.6 + 8.5) / (12.5 + 48.2)).epsilon(1e-12));
}

TEST_CASE("total_gflops sums selected costs") {
    auto ps = reference_pools();
    CHECK(total_gflops(ActionSet::fixed({{2}, {0}, {0}}), ps) ==
          doctest::Approx(38.4).epsilon(1e-12));

    PoolSet single;
    single.pools.push_back(pool("body", {7.6, 8.5, 12.5}));
    CHECK(total_gflops(ActionSet::fixed({{2}}), single) == doctest::Approx(12.5).epsilon(1e-12));

    PoolSet two;
    two.pools.push_back(pool("body", {12.5, 48.2}, 2));
    CHECK(total_gflops(ActionSet::fixed({{0, 1}}), two) == doctest::Approx(60.7).epsilon(1e-12));
}

TEST_CASE("invalid actions are rejected") {
    auto ps = reference_pools();
    CHECK_THROWS_AS(normalized_cost(ActionSet::fixed({{3}, {0}, {0}}), ps), InvalidActionError);
    CHECK_THROWS_AS(normalized_cost(ActionSet::fixed({{0}, {0}}), ps), InvalidActionError);

    PoolSet two;
    two.pools.push_back(pool("body", {1.0, 2.0, 3.0}, 2));
    CHECK_THROWS_AS(normalized_cost(ActionSet::fixed({{1, 1}}), two), InvalidActionError);
    CHECK_THROWS_AS(normalized_cost(ActionSet::fixed({{1}}), two), InvalidActionError);
}

TEST_CASE("validate_poolset reports all violations") {
    PoolSet ok = reference_pools();
    CHECK(validate_poolset(ok).empty());

    PoolSet bad;
    bad.pools.push_back(pool("face", {1.0}, 2)); // select_k > size
    auto errors = validate_poolset(bad);
    REQUIRE(!errors.empty());
    bool mentions_k = false;
    for (const auto& e : errors) mentions_k |= e.find("select_k") != std::string::npos;
    CHECK(mentions_k);

    PoolSet dup;
    dup.pools.push_back(pool("face", {1.0, 2.0}));
    dup.pools[0].models[1].id = dup.pools[0].models[0].id;
    errors = validate_poolset(dup);
    REQUIRE(!errors.empty());
    bool mentions_dup = false;
    for (const auto& e : errors) mentions_dup |= e.find("duplicate") != std::string::npos;
    CHECK(mentions_dup);

    PoolSet empty;
    CHECK(!validate_poolset(empty).empty());

    PoolSet badcost;
    badcost.pools.push_back(pool("face", {0.0}));
    CHECK(!validate_poolset(badcost).empty());

    PoolSet baddisc;
    baddisc.pools.push_back(pool("face", {1.0}));
    baddisc.pools[0].models[0].discriminability = 1.5;
    CHECK(!validate_poolset(baddisc).empty());

    PoolSet twin;
    twin.pools.push_back(pool("face", {1.0}));
    twin.pools.push_back(pool("face", {2.0}));
    CHECK(!validate_poolset(twin).empty());
}

TEST_CASE("normalized_cost is monotone under cheaper substitutions") {
    Rng rng(20240518);
    for (int trial = 0; trial < 200; ++trial) {
        PoolSet ps;
        int n_pools = 1 + static_cast<int>(rng.below(3));
        for (int m = 0; m < n_pools; ++m) {
            int n_models = 2 + static_cast<int>(rng.below(4));
            std::vector<double> costs;
            for (int i = 0; i < n_models; ++i) costs.push_back(0.5 + 100.0 * rng.uniform());
            int k = 1 + static_cast<int>(rng.below(2));
            if (k > n_models) k = n_models;
            ps.pools.push_back(pool("m" + std::to_string(m), costs, k));
        }

        // random valid action
        ActionSet action;
        for (const auto& p : ps.pools) {
            std::vector<int> order(p.models.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
            for (size_t i = 0; i + 1 < order.size(); ++i) {
                size_t j = i + rng.below(order.size() - i);
                std::swap(order[i], order[j]);
            }
            order.resize(p.select_k);
            action.picks.push_back(order);
        }
        double base = normalized_cost(action, ps);
        CHECK(base >= 0.0);
        CHECK(base <= 1.0 + 1e-12);

        // swap one selected model for a strictly cheaper unselected one
        for (size_t m = 0; m < ps.pools.size(); ++m) {
            const auto& p = ps.pools[m];
            for (size_t slot = 0; slot < action.picks[m].size(); ++slot) {
                int cur = action.picks[m][slot];
                for (size_t cand = 0; cand < p.models.size(); ++cand) {
                    bool selected = std::find(action.picks[m].begin(), action.picks[m].end(),
                                              static_cast<int>(cand)) != action.picks[m].end();
                    if (selected) continue;
                    if (p.models[cand].cost_gflops >= p.models[cur].cost_gflops) continue;
                    ActionSet cheaper = action;
                    cheaper.picks[m][slot] = static_cast<int>(cand);
                    CHECK(normalized_cost(cheaper, ps) <= base + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("normalized_cost bounds: 1 only at the most expensive selection") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        PoolSet ps;
        int n_pools = 1 + static_cast<int>(rng.below(3));
        for (int m = 0; m < n_pools; ++m) {
            std::vector<double> costs;
            int n_models = 2 + static_cast<int>(rng.below(3));
            for (int i = 0; i < n_models; ++i) costs.push_back(0.5 + 10.0 * rng.uniform());
            ps.pools.push_back(pool("m" + std::to_string(m), costs, 1));
        }
        CHECK(normalized_cost(ActionSet::fixed(most_expensive_picks(ps)), ps) ==
              doctest::Approx(1.0).epsilon(1e-12));

        double lower = 0.0;
        for (const auto& p : ps.pools) {
            double mn = p.models[0].cost_gflops, mx = p.models[0].cost_gflops;
            for (const auto& m : p.models) {
                mn = std::min(mn, m.cost_gflops);
                mx = std::max(mx, m.cost_gflops);
            }
            lower += mn / mx;
        }
        lower /= ps.pools.size();
        CHECK(normalized_cost(ActionSet::fixed(cheapest_picks(ps)), ps) ==
              doctest::Approx(lower).epsilon(1e-12));
        CHECK(lower > 0.0);
    }
}

TEST_CASE("pools_from_json parses the documented schema") {
    const char* text = R"({
      "modalities": [
        {"name": "face", "select_k": 1, "models": [
          {"id": "f0", "cost_gflops": 5.2, "discriminability": 0.5, "embed_dim": 512},
          {"id": "f1", "cost_gflops": 12.7, "discriminability": 0.7}
        ]},
        {"name": "body", "select_k": 2, "models": [
          {"id": "b0", "cost_gflops": 7.6, "discriminability": 0.4},
          {"id": "b1", "cost_gflops": 8.5, "discriminability": 0.5},
          {"id": "b2", "cost_gflops": 12.5, "discriminability": 0.6}
        ]}
      ]})";
    PoolSet ps = pools_from_json(text);
    REQUIRE(ps.pools.size() == 2);
    CHECK(ps.pools[0].modality == "face");
    CHECK(ps.pools[0].select_k == 1);
    CHECK(ps.pools[0].models[0].embed_dim == 512);
    CHECK(ps.pools[1].select_k == 2);
    CHECK(ps.pools[1].models[2].cost_gflops == doctest::Approx(12.5));

    CHECK_THROWS_AS(pools_from_json("{"), ConfigError);
    CHECK_THROWS_AS(pools_from_json(R"({"modalities": []})"), ConfigError);
    // invariant violations surface as config errors at load time
    CHECK_THROWS_AS(pools_from_json(R"({"modalities": [
        {"name": "face", "select_k": 3, "models": [
          {"id": "f0", "cost_gflops": 1.0, "discriminability": 0.5}]}]})"),
                    ConfigError);
}

TEST_CASE("subset_pools preserves order and validates names") {
    auto ps = reference_pools();
    PoolSet sub = subset_pools(ps, {"body", "face"});
    REQUIRE(sub.pools.size() == 2);
    CHECK(sub.pools[0].modality == "face"); // pool order, not request order
    CHECK(sub.pools[1].modality == "body");

    CHECK_THROWS_AS(subset_pools(ps, {}), ConfigError);
    CHECK_THROWS_AS(subset_pools(ps, {"ear"}), ConfigError);
}

TEST_CASE("cheapest and most expensive picks") {
    auto ps = reference_pools();
    CHECK(cheapest_picks(ps) == std::vector<std::vector<int>>{{0}, {0}, {0}});
    CHECK(most_expensive_picks(ps) == std::vector<std::vector<int>>{{2}, {2}, {2}});

    PoolSet two;
    two.pools.push_back(pool("body", {8.5, 7.6, 12.5, 48.2}, 2));
    CHECK(cheapest_picks(two) == std::vector<std::vector<int>>{{0, 1}});
    CHECK(most_expensive_picks(two) == std::vector<std::vector<int>>{{2, 3}});

    // cost ties break toward the lower index
    PoolSet tie;
    tie.pools.push_back(pool("face", {3.0, 3.0, 3.0}));
    CHECK(cheapest_picks(tie) == std::vector<std::vector<int>>{{0}});
    CHECK(most_expensive_picks(tie) == std::vector<std::vector<int>>{{0}});
}
