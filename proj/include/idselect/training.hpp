#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "idselect/agent.hpp"
#include "idselect/pool.hpp"
#include "idselect/simworld.hpp"

namespace idselect {

struct TrainConfig {
    int epochs = 30;
    int pairs_per_epoch = 256;
    int batch_size = 8;
    double positive_frac = 0.5;

    double lr = 5e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 1e-4;
    double clip_norm = 1.0;

    double entropy_beta = 0.01;
    double critic_alpha = 0.5;

    double lambda_init = 0.1;
    double lambda_eta = 5e-3;
    double cost_target = 0.45;
    double cost_start = 0.9;      // curriculum anneal origin
    double curriculum_frac = 0.3; // fraction of epochs spent annealing

    int checkpoint_every = 0; // epochs between checkpoints; 0 = final only
    uint64_t seed = 1;

    AgentDims dims;
};

// All invariant violations, empty when valid.
std::vector<std::string> validate_train_config(const TrainConfig& config);

// JSON round-trip: unspecified fields keep their defaults, unknown keys are
// rejected so typos cannot silently fall back to defaults.
TrainConfig train_config_from_json(const std::string& text);
std::string train_config_to_json(const TrainConfig& config);
TrainConfig load_train_config(const std::string& path);

// Dual variable for the budget constraint plus its annealing schedule. The
// price rises while average cost overshoots the current target and decays
// toward zero otherwise, never below zero.
struct BudgetController {
    double lambda = 0.1;
    double eta = 5e-3;
    double target_final = 0.45;
    double cost_start = 0.9;
    double warmup_frac = 0.3;

    static BudgetController from_config(const TrainConfig& config) {
        return {config.lambda_init, config.lambda_eta, config.cost_target, config.cost_start,
                config.curriculum_frac};
    }

    // Annealed cost target: linear from cost_start down to target_final over
    // the first warmup_frac of epochs, constant afterwards. epoch is 0-based.
    double target(int epoch, int total_epochs) const;

    // lambda <- max(0, lambda + eta * (mean_cost - current_target))
    void update(double mean_cost, double current_target);
};

// Per-modality scores of the selected models: for select_k > 1 the model
// similarities within a modality average into one modality score first.
std::map<std::string, double> modality_scores(const World& world, const PoolSet& pools,
                                              const PairSample& pair, const ActionSet& action);

// s_final = mean over modalities of the modality scores.
double fuse_scores(const std::map<std::string, double>& similarities);

// Stable binary cross-entropy of sigmoid(logit) against label in {0, 1}:
// softplus(-logit) + (1 - label) * logit.
double binary_cross_entropy(double logit, int label);

// r = 1 - BCE(sigmoid(logit), label) - lambda * cost_norm
double reward(double logit, int label, double lambda, double cost_norm);

struct LossBreakdown {
    double actor = 0.0;  // mean over batch
    double critic = 0.0; // mean over batch
    double total = 0.0;  // actor + critic_alpha * critic
};

// Batch losses from already-computed scalars: per sample,
//   actor  = -(r - V) * log_prob - entropy_beta * H   (V treated as constant)
//   critic = (r - V)^2
LossBreakdown losses(const Vec& rewards, const Vec& values, const Vec& log_probs,
                     const Vec& entropies, const TrainConfig& config);

// Everything observed while processing one pair.
struct SampleOutcome {
    ActionSet action;
    double fused_score = 0.0;
    double bce = 0.0;
    double cost_norm = 0.0;
    double reward = 0.0;
    double value = 0.0;
    double advantage = 0.0; // reward - value, value treated as constant
    double actor_loss = 0.0;
    double critic_loss = 0.0;
};

// Scores a given action for the pair and accumulates the gradient of
//   actor_loss + critic_alpha * critic_loss
// into grad (canonical flattening order, pre-sized to params.size()). The
// action's log_prob and entropy are recomputed from the distribution at
// params; rewards and costs are constants of the action (nothing
// differentiates through the similarity oracle).
SampleOutcome compute_action_gradients(const World& world, const PoolSet& pools,
                                       const PairSample& pair, const AgentParams& params,
                                       double lambda, const TrainConfig& config,
                                       const ActionSet& action, Vec& grad);

// Samples the action first, then delegates to compute_action_gradients.
SampleOutcome compute_gradients(const World& world, const PoolSet& pools, const PairSample& pair,
                                const AgentParams& params, double lambda,
                                const TrainConfig& config, Rng& action_rng, Vec& grad);

// The objective whose analytic gradient the functions above accumulate, as a
// plain function of params for finite-difference checks: actions, rewards,
// and advantages stay fixed; log-probs, entropies, and values are recomputed
// at params. Returns mean actor + critic_alpha * mean critic.
double surrogate_loss(const World& world, const PoolSet& pools,
                      std::span<const PairSample> pairs, const std::vector<ActionSet>& actions,
                      const Vec& rewards, const Vec& advantages, const AgentParams& params,
                      const TrainConfig& config);

// Throws NumericError naming the first parameter block holding a non-finite
// gradient entry.
void check_finite_grad(const Vec& grad, const AgentParams& params);

struct AdamState {
    Vec m;
    Vec v;
    long t = 0;

    static AdamState init(size_t n) {
        AdamState s;
        s.m.assign(n, 0.0);
        s.v.assign(n, 0.0);
        return s;
    }
};

// One optimizer step: global-norm clip on the loss gradient, then coupled L2
// weight decay, then Adam with bias correction. Returns the pre-clip norm.
double optimizer_step(Vec& theta, Vec grad, AdamState& state, const TrainConfig& config);

// One row per optimizer step. The lambda column holds the value after that
// batch's controller update; the rewards aggregated in the same row were
// computed with the previous value.
struct StepRecord {
    int epoch = 0;
    int step = 0; // global batch index
    double lambda = 0.0;
    double curriculum_target = 0.0;
    double mean_reward = 0.0;
    double mean_bce = 0.0;
    double mean_cost = 0.0;
    double mean_entropy = 0.0;
    double mean_value = 0.0;
    double mean_advantage = 0.0;
    double actor_loss = 0.0;
    double critic_loss = 0.0;
    double total_loss = 0.0;
    double grad_norm = 0.0; // batch-mean gradient, before clipping
};

// CSV with a header row; doubles carry 17 significant digits so the file
// round-trips bit-exactly.
std::string records_to_csv(const std::vector<StepRecord>& records);
std::vector<StepRecord> records_from_csv(const std::string& text);
void save_records(const std::vector<StepRecord>& records, const std::string& path);
std::vector<StepRecord> load_records(const std::string& path);

struct TrainResult {
    AgentParams params;
    std::vector<StepRecord> records;
    double lambda = 0.0; // final controller state
};

// Called after each finished epoch with the in-progress result (checkpoint
// streaming; exceptions propagate and abort training).
using EpochCallback = std::function<void(int epoch, const TrainResult& partial)>;

// Full training run. Bit-deterministic for fixed (world, pools, config):
// every random draw derives from config.seed, never from wall clock.
TrainResult train(const World& world, const PoolSet& pools, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

} // namespace idselect
