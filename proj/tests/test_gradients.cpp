// Analytic gradients against central finite differences of the surrogate
// objective (fixed actions, rewards, and advantages), plus the optimizer
// update rules in closed form.

#include "doctest.h"

#include <cmath>
#include <span>
#include <vector>

#include "idselect/agent.hpp"
#include "idselect/errors.hpp"
#include "idselect/pool.hpp"
#include "idselect/rng.hpp"
#include "idselect/simworld.hpp"
#include "idselect/training.hpp"

using namespace idselect;

namespace {

PoolSet mixed_pools() {
    PoolSet ps;
    const char* names[2] = {"face", "body"};
    int sizes[2] = {3, 4};
    int ks[2] = {1, 2};
    double base_cost[2] = {5.0, 7.0};
    for (int m = 0; m < 2; ++m) {
        ModalityPool p;
        p.modality = names[m];
        p.select_k = ks[m];
        for (int i = 0; i < sizes[m]; ++i) {
            ModelSpec spec;
            spec.id = p.modality + "_" + std::to_string(i);
            spec.modality = p.modality;
            spec.cost_gflops = base_cost[m] * (1 + i);
            spec.discriminability = 0.4 + 0.15 * i;
            spec.embed_dim = 64;
            p.models.push_back(spec);
        }
        ps.pools.push_back(p);
    }
    return ps;
}

World grad_world() {
    WorldConfig c;
    c.identities = 6;
    c.samples_per_identity = 3;
    c.descriptor_dim = 8;
    c.frames_min = 3;
    c.frames_max = 5;
    c.modalities = {"face", "body"};
    return generate_world(17, c);
}

TrainConfig grad_config() {
    TrainConfig config;
    config.dims.descriptor_dim = 8;
    config.dims.feature_dim = 12;
    config.dims.pooled_dim = 10;
    return config;
}

struct FixedBatch {
    std::vector<PairSample> pairs;
    std::vector<ActionSet> actions;
    Vec rewards;
    Vec advantages;
    Vec analytic; // batch-mean gradient at the expansion point
};

FixedBatch make_batch(const World& world, const PoolSet& pools, const AgentParams& params,
                      const TrainConfig& config, double lambda, uint64_t seed, int n_pairs) {
    FixedBatch batch;
    batch.pairs = make_pairs(world, n_pairs, 0.5, seed);
    batch.analytic.assign(params.size(), 0.0);
    Rng rng(mix_seed(seed, 0x9e3779b97f4a7c15ull));
    for (const auto& pair : batch.pairs) {
        auto outcome =
            compute_gradients(world, pools, pair, params, lambda, config, rng, batch.analytic);
        batch.actions.push_back(outcome.action);
        batch.rewards.push_back(outcome.reward);
        batch.advantages.push_back(outcome.advantage);
    }
    for (auto& g : batch.analytic) g /= batch.pairs.size();
    return batch;
}

double fd_at(const World& world, const PoolSet& pools, const FixedBatch& batch,
             AgentParams& params, const TrainConfig& config, size_t j, double step) {
    double saved = params.theta[j];
    params.theta[j] = saved + step;
    double up = surrogate_loss(world, pools, batch.pairs, batch.actions, batch.rewards,
                               batch.advantages, params, config);
    params.theta[j] = saved - step;
    double down = surrogate_loss(world, pools, batch.pairs, batch.actions, batch.rewards,
                                 batch.advantages, params, config);
    params.theta[j] = saved;
    return (up - down) / (2.0 * step);
}

// Largest relative mismatch over the whole parameter vector. Magnitudes are
// floored at 1e-6 so dead directions compare absolutely.
double max_rel_error(const World& world, const PoolSet& pools, const FixedBatch& batch,
                     AgentParams& params, const TrainConfig& config) {
    double worst = 0.0;
    for (size_t j = 0; j < params.size(); ++j) {
        double fd = fd_at(world, pools, batch, params, config, j, 1e-5);
        double a = batch.analytic[j];
        double rel = std::abs(a - fd) / std::max({1e-6, std::abs(a), std::abs(fd)});
        if (rel > worst) worst = rel;
    }
    return worst;
}

} // namespace

TEST_CASE("analytic gradient matches finite differences at random points") {
    World world = grad_world();
    PoolSet pools = mixed_pools();
    TrainConfig config = grad_config();

    for (uint64_t point = 1; point <= 3; ++point) {
        AgentParams params = AgentParams::init(config.dims, pools, 100 + point);
        auto batch = make_batch(world, pools, params, config, 0.1, 40 + point, 6);
        double worst = max_rel_error(world, pools, batch, params, config);
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("analytic gradient matches finite differences after 50 training steps") {
    World world = grad_world();
    PoolSet pools = mixed_pools();
    TrainConfig config = grad_config();
    config.epochs = 5;
    config.pairs_per_epoch = 80;
    config.batch_size = 8; // 10 steps per epoch -> 50 optimizer steps
    config.seed = 3;

    TrainResult result = train(world, pools, config);
    REQUIRE(result.records.size() == 50);

    auto batch = make_batch(world, pools, result.params, config, result.lambda, 99, 6);
    double worst = max_rel_error(world, pools, batch, result.params, config);
    CHECK(worst < 1e-4);
}

TEST_CASE("policy heads receive no gradient when advantage and entropy terms vanish") {
    World world = grad_world();
    PoolSet pools = mixed_pools();
    TrainConfig config = grad_config();
    config.entropy_beta = 0.0;

    AgentParams params = AgentParams::init(config.dims, pools, 7);
    auto batch = make_batch(world, pools, params, config, 0.1, 51, 5);
    std::fill(batch.advantages.begin(), batch.advantages.end(), 0.0);

    // with zero advantage and zero entropy weight the surrogate depends on
    // the head parameters not at all; finite differences must agree
    for (size_t m = 0; m < params.modalities.size(); ++m)
        for (size_t part = 0; part < 6; ++part) {
            const auto& blk = params.layout[params.idx_head(m, part)];
            size_t len = static_cast<size_t>(blk.rows) * (blk.cols > 0 ? blk.cols : 1);
            for (size_t off = 0; off < len; off += 3) {
                double fd = fd_at(world, pools, batch, params, config, blk.offset + off, 1e-5);
                CHECK(std::abs(fd) < 1e-9);
            }
        }
}

TEST_CASE("value head gradient is 2 alpha (V - r) dV/dpsi") {
    World world = grad_world();
    PoolSet pools = mixed_pools();
    TrainConfig config = grad_config();
    config.entropy_beta = 0.0;

    AgentParams params = AgentParams::init(config.dims, pools, 8);
    auto batch = make_batch(world, pools, params, config, 0.1, 52, 4);
    std::fill(batch.advantages.begin(), batch.advantages.end(), 0.0);

    // predicted gradient: mean over batch of alpha * 2 (V - r) dV/dtheta
    Vec predicted(params.size(), 0.0);
    for (size_t i = 0; i < batch.pairs.size(); ++i) {
        auto trace = forward_trace(*batch.pairs[i].probe, params);
        std::vector<Vec> dlogits;
        for (const auto& l : trace.logits) dlogits.push_back(Vec(l.size(), 0.0));
        double coeff = config.critic_alpha * 2.0 * (trace.value - batch.rewards[i]);
        backprop(trace, params, dlogits, coeff, predicted);
    }
    for (auto& g : predicted) g /= batch.pairs.size();

    for (size_t j = 0; j < params.size(); j += 5) {
        double fd = fd_at(world, pools, batch, params, config, j, 1e-5);
        CHECK(std::abs(fd - predicted[j]) < 1e-7);
    }
}

TEST_CASE("check_finite_grad names the offending block") {
    PoolSet pools = mixed_pools();
    TrainConfig config = grad_config();
    AgentParams params = AgentParams::init(config.dims, pools, 9);

    Vec grad(params.size(), 0.0);
    check_finite_grad(grad, params);

    const auto& blk = params.layout[params.idx_head(1, 2)];
    grad[blk.offset + 1] = std::nan("");
    CHECK_THROWS_WITH_AS(check_finite_grad(grad, params),
                         doctest::Contains(blk.name.c_str()), NumericError);
}

TEST_CASE("optimizer_step clips by global norm before the update") {
    TrainConfig config;
    config.lr = 5e-4;
    config.weight_decay = 0.0;
    config.clip_norm = 1.0;

    Vec theta = {0.5, -0.25, 0.75};
    Vec grad = {2.0, 0.0, 0.0};
    AdamState state = AdamState::init(theta.size());
    Vec before = theta;
    double norm = optimizer_step(theta, grad, state, config);
    CHECK(norm == doctest::Approx(2.0).epsilon(1e-12));

    // clipping to norm 1 then Adam: first-step delta is -lr * g/(|g| + eps)
    double expected0 = before[0] - config.lr * (1.0 / (1.0 + config.adam_eps));
    CHECK(theta[0] == doctest::Approx(expected0).epsilon(1e-12));
    CHECK(theta[1] == before[1]);
    CHECK(theta[2] == before[2]);

    // an over-norm gradient updates identically to its pre-scaled copy
    Vec theta_a = {0.1, 0.2}, theta_b = {0.1, 0.2};
    Vec big = {3.0, 4.0};             // norm 5
    Vec scaled = {3.0 / 5, 4.0 / 5};  // norm 1
    AdamState sa = AdamState::init(2), sb = AdamState::init(2);
    optimizer_step(theta_a, big, sa, config);
    optimizer_step(theta_b, scaled, sb, config);
    CHECK(theta_a[0] == doctest::Approx(theta_b[0]).epsilon(1e-14));
    CHECK(theta_a[1] == doctest::Approx(theta_b[1]).epsilon(1e-14));
}

TEST_CASE("optimizer_step Adam first-step closed form and fixed point") {
    TrainConfig config;
    config.lr = 5e-4;
    config.weight_decay = 0.0;
    config.clip_norm = 100.0;

    Vec theta = {1.0};
    AdamState state = AdamState::init(1);
    optimizer_step(theta, {1.0}, state, config);
    CHECK(theta[0] == doctest::Approx(1.0 - config.lr / (1.0 + config.adam_eps)).epsilon(1e-12));
    CHECK(state.t == 1);

    // zero gradient, zero decay: parameters unchanged
    Vec fixed = {0.3, -0.7};
    AdamState s2 = AdamState::init(2);
    optimizer_step(fixed, {0.0, 0.0}, s2, config);
    CHECK(fixed[0] == 0.3);
    CHECK(fixed[1] == -0.7);
}

TEST_CASE("optimizer_step applies weight decay after clipping") {
    TrainConfig config;
    config.lr = 5e-4;
    config.weight_decay = 0.1;
    config.clip_norm = 1.0;

    // loss gradient is zero, so clipping sees norm 0; decay still updates
    Vec theta = {2.0};
    AdamState state = AdamState::init(1);
    double norm = optimizer_step(theta, {0.0}, state, config);
    CHECK(norm == doctest::Approx(0.0).epsilon(1e-15));

    double g = config.weight_decay * 2.0; // decay-coupled gradient
    double expected = 2.0 - config.lr * (g / (std::abs(g) + config.adam_eps));
    CHECK(theta[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("optimizer_step rejects non-finite gradients") {
    TrainConfig config;
    Vec theta = {1.0};
    AdamState state = AdamState::init(1);
    CHECK_THROWS_AS(optimizer_step(theta, {std::nan("")}, state, config), NumericError);
}
