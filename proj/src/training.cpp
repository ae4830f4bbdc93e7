#include "idselect/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "idselect/errors.hpp"
#include "idselect/log.hpp"
#include "idselect/rng.hpp"

namespace idselect {

std::vector<std::string> validate_train_config(const TrainConfig& config) {
    std::vector<std::string> errors;
    auto require = [&](bool ok, const char* msg) {
        if (!ok) errors.emplace_back(msg);
    };
    require(config.epochs >= 1, "epochs must be >= 1");
    require(config.pairs_per_epoch >= 1, "pairs_per_epoch must be >= 1");
    require(config.batch_size >= 1, "batch_size must be >= 1");
    require(config.positive_frac > 0.0 && config.positive_frac < 1.0,
            "positive_frac must be in (0, 1)");
    require(config.lr > 0.0, "lr must be positive");
    require(config.adam_beta1 >= 0.0 && config.adam_beta1 < 1.0, "adam_beta1 must be in [0, 1)");
    require(config.adam_beta2 >= 0.0 && config.adam_beta2 < 1.0, "adam_beta2 must be in [0, 1)");
    require(config.adam_eps > 0.0, "adam_eps must be positive");
    require(config.weight_decay >= 0.0, "weight_decay must be >= 0");
    require(config.clip_norm > 0.0, "clip_norm must be positive");
    require(config.entropy_beta >= 0.0, "entropy_beta must be >= 0");
    require(config.critic_alpha >= 0.0, "critic_alpha must be >= 0");
    require(config.lambda_init >= 0.0, "lambda_init must be >= 0");
    require(config.lambda_eta >= 0.0, "lambda_eta must be >= 0");
    require(config.cost_target > 0.0 && config.cost_target <= 1.0,
            "cost_target must be in (0, 1]");
    require(config.cost_start > 0.0 && config.cost_start <= 1.0, "cost_start must be in (0, 1]");
    require(config.cost_start >= config.cost_target, "cost_start must be >= cost_target");
    require(config.curriculum_frac >= 0.0 && config.curriculum_frac <= 1.0,
            "curriculum_frac must be in [0, 1]");
    require(config.checkpoint_every >= 0, "checkpoint_every must be >= 0");
    require(config.dims.descriptor_dim >= 1 && config.dims.feature_dim >= 1 &&
                config.dims.pooled_dim >= 1,
            "agent dims must be positive");
    return errors;
}

namespace {

void reject_unknown_keys(const nlohmann::json& obj, const std::vector<std::string>& known,
                         const char* where) {
    for (const auto& item : obj.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
}

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

} // namespace

TrainConfig train_config_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("train config: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("train config: top level must be an object");

    TrainConfig config;
    try {
        reject_unknown_keys(doc,
                            {"epochs", "pairs_per_epoch", "batch_size", "positive_frac", "lr",
                             "adam_beta1", "adam_beta2", "adam_eps", "weight_decay", "clip_norm",
                             "entropy_beta", "critic_alpha", "lambda_init", "lambda_eta",
                             "cost_target", "cost_start", "curriculum_frac", "checkpoint_every",
                             "seed", "dims"},
                            "train config");
        read_field(doc, "epochs", config.epochs);
        read_field(doc, "pairs_per_epoch", config.pairs_per_epoch);
        read_field(doc, "batch_size", config.batch_size);
        read_field(doc, "positive_frac", config.positive_frac);
        read_field(doc, "lr", config.lr);
        read_field(doc, "adam_beta1", config.adam_beta1);
        read_field(doc, "adam_beta2", config.adam_beta2);
        read_field(doc, "adam_eps", config.adam_eps);
        read_field(doc, "weight_decay", config.weight_decay);
        read_field(doc, "clip_norm", config.clip_norm);
        read_field(doc, "entropy_beta", config.entropy_beta);
        read_field(doc, "critic_alpha", config.critic_alpha);
        read_field(doc, "lambda_init", config.lambda_init);
        read_field(doc, "lambda_eta", config.lambda_eta);
        read_field(doc, "cost_target", config.cost_target);
        read_field(doc, "cost_start", config.cost_start);
        read_field(doc, "curriculum_frac", config.curriculum_frac);
        read_field(doc, "checkpoint_every", config.checkpoint_every);
        read_field(doc, "seed", config.seed);
        if (doc.contains("dims")) {
            const auto& dims = doc.at("dims");
            reject_unknown_keys(dims, {"descriptor_dim", "feature_dim", "pooled_dim"},
                                "train config dims");
            read_field(dims, "descriptor_dim", config.dims.descriptor_dim);
            read_field(dims, "feature_dim", config.dims.feature_dim);
            read_field(dims, "pooled_dim", config.dims.pooled_dim);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("train config: ") + e.what());
    }

    auto errors = validate_train_config(config);
    if (!errors.empty()) {
        std::string joined = "train config invalid:";
        for (const auto& e : errors) joined += " " + e + ";";
        throw ConfigError(joined);
    }
    return config;
}

std::string train_config_to_json(const TrainConfig& config) {
    nlohmann::json doc{
        {"epochs", config.epochs},
        {"pairs_per_epoch", config.pairs_per_epoch},
        {"batch_size", config.batch_size},
        {"positive_frac", config.positive_frac},
        {"lr", config.lr},
        {"adam_beta1", config.adam_beta1},
        {"adam_beta2", config.adam_beta2},
        {"adam_eps", config.adam_eps},
        {"weight_decay", config.weight_decay},
        {"clip_norm", config.clip_norm},
        {"entropy_beta", config.entropy_beta},
        {"critic_alpha", config.critic_alpha},
        {"lambda_init", config.lambda_init},
        {"lambda_eta", config.lambda_eta},
        {"cost_target", config.cost_target},
        {"cost_start", config.cost_start},
        {"curriculum_frac", config.curriculum_frac},
        {"checkpoint_every", config.checkpoint_every},
        {"seed", config.seed},
        {"dims",
         {{"descriptor_dim", config.dims.descriptor_dim},
          {"feature_dim", config.dims.feature_dim},
          {"pooled_dim", config.dims.pooled_dim}}},
    };
    return doc.dump(1);
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open train config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return train_config_from_json(buf.str());
}

double BudgetController::target(int epoch, int total_epochs) const {
    int warm = static_cast<int>(warmup_frac * total_epochs);
    if (epoch >= warm || warm <= 0) return target_final;
    return cost_start + (target_final - cost_start) * (static_cast<double>(epoch) / warm);
}

void BudgetController::update(double mean_cost, double current_target) {
    lambda = std::max(0.0, lambda + eta * (mean_cost - current_target));
}

std::map<std::string, double> modality_scores(const World& world, const PoolSet& pools,
                                              const PairSample& pair, const ActionSet& action) {
    validate_action(action, pools);
    std::map<std::string, double> scores;
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        double sum = 0.0;
        for (int pick : action.picks[m])
            sum += similarity_oracle(world, pools.pools[m].models[pick], pair);
        scores[pools.pools[m].modality] = sum / static_cast<double>(action.picks[m].size());
    }
    return scores;
}

double fuse_scores(const std::map<std::string, double>& similarities) {
    if (similarities.empty()) throw ShapeError("fuse_scores: no modality scores");
    double sum = 0.0;
    for (const auto& [modality, s] : similarities) sum += s;
    return sum / static_cast<double>(similarities.size());
}

double binary_cross_entropy(double logit, int label) {
    if (label != 0 && label != 1) throw InvalidPairError("label must be 0 or 1");
    return softplus(-logit) + (1 - label) * logit;
}

double reward(double logit, int label, double lambda, double cost_norm) {
    return 1.0 - binary_cross_entropy(logit, label) - lambda * cost_norm;
}

LossBreakdown losses(const Vec& rewards, const Vec& values, const Vec& log_probs,
                     const Vec& entropies, const TrainConfig& config) {
    size_t n = rewards.size();
    if (values.size() != n || log_probs.size() != n || entropies.size() != n)
        throw ShapeError("losses: batch length mismatch");
    if (n == 0) throw ShapeError("losses: empty batch");
    LossBreakdown out;
    for (size_t i = 0; i < n; ++i) {
        double adv = rewards[i] - values[i];
        out.actor += -adv * log_probs[i] - config.entropy_beta * entropies[i];
        out.critic += adv * adv;
    }
    out.actor /= static_cast<double>(n);
    out.critic /= static_cast<double>(n);
    out.total = out.actor + config.critic_alpha * out.critic;
    return out;
}

namespace {

SampleOutcome accumulate_sample(const World& world, const PoolSet& pools, const PairSample& pair,
                                const AgentParams& params, double lambda,
                                const TrainConfig& config, const ActionSet& action,
                                const ForwardTrace& trace, const SelectionDistribution& dist,
                                Vec& grad) {
    SampleOutcome out;
    out.action = action;
    out.action.log_prob = action_logprob(dist, pools, action);
    out.action.entropy = joint_entropy(dist, pools);
    out.fused_score = fuse_scores(modality_scores(world, pools, pair, action));
    out.bce = binary_cross_entropy(out.fused_score, pair.label);
    out.cost_norm = normalized_cost(action, pools);
    out.reward = 1.0 - out.bce - lambda * out.cost_norm;
    out.value = trace.value;
    out.advantage = out.reward - out.value;
    out.actor_loss =
        -out.advantage * out.action.log_prob - config.entropy_beta * out.action.entropy;
    out.critic_loss = out.advantage * out.advantage;

    std::vector<Vec> dlogits(pools.pools.size());
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        Vec glp = action_logprob_grad(dist.dists[m], action.picks[m]);
        Vec gh = entropy_grad(dist.dists[m], pools.pools[m].select_k);
        dlogits[m].resize(glp.size());
        for (size_t i = 0; i < glp.size(); ++i)
            dlogits[m][i] = -out.advantage * glp[i] - config.entropy_beta * gh[i];
    }
    // critic: d/dV of critic_alpha * (r - V)^2; the advantage in the actor
    // term is a constant with respect to V.
    double dvalue = config.critic_alpha * 2.0 * (out.value - out.reward);
    backprop(trace, params, dlogits, dvalue, grad);
    return out;
}

} // namespace

SampleOutcome compute_action_gradients(const World& world, const PoolSet& pools,
                                       const PairSample& pair, const AgentParams& params,
                                       double lambda, const TrainConfig& config,
                                       const ActionSet& action, Vec& grad) {
    ForwardTrace trace = forward_trace(*pair.probe, params);
    SelectionDistribution dist = distribution_from_trace(trace);
    return accumulate_sample(world, pools, pair, params, lambda, config, action, trace, dist,
                             grad);
}

SampleOutcome compute_gradients(const World& world, const PoolSet& pools, const PairSample& pair,
                                const AgentParams& params, double lambda,
                                const TrainConfig& config, Rng& action_rng, Vec& grad) {
    ForwardTrace trace = forward_trace(*pair.probe, params);
    SelectionDistribution dist = distribution_from_trace(trace);
    ActionSet action = sample_action(dist, pools, action_rng);
    return accumulate_sample(world, pools, pair, params, lambda, config, action, trace, dist,
                             grad);
}

double surrogate_loss(const World& world, const PoolSet& pools,
                      std::span<const PairSample> pairs, const std::vector<ActionSet>& actions,
                      const Vec& rewards, const Vec& advantages, const AgentParams& params,
                      const TrainConfig& config) {
    size_t n = pairs.size();
    if (actions.size() != n || rewards.size() != n || advantages.size() != n)
        throw ShapeError("surrogate_loss: batch length mismatch");
    if (n == 0) throw ShapeError("surrogate_loss: empty batch");
    (void)world;

    double actor = 0.0;
    double critic = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ForwardTrace trace = forward_trace(*pairs[i].probe, params);
        SelectionDistribution dist = distribution_from_trace(trace);
        double lp = action_logprob(dist, pools, actions[i]);
        double h = joint_entropy(dist, pools);
        actor += -advantages[i] * lp - config.entropy_beta * h;
        double delta = rewards[i] - trace.value;
        critic += delta * delta;
    }
    return actor / n + config.critic_alpha * (critic / n);
}

void check_finite_grad(const Vec& grad, const AgentParams& params) {
    if (grad.size() != params.size()) throw ShapeError("check_finite_grad: size mismatch");
    for (const auto& block : params.layout) {
        size_t count = static_cast<size_t>(block.rows) * (block.cols > 0 ? block.cols : 1);
        for (size_t i = 0; i < count; ++i)
            if (!std::isfinite(grad[block.offset + i]))
                throw NumericError("non-finite gradient in block '" + block.name + "'");
    }
}

double optimizer_step(Vec& theta, Vec grad, AdamState& state, const TrainConfig& config) {
    if (grad.size() != theta.size() || state.m.size() != theta.size() ||
        state.v.size() != theta.size())
        throw ShapeError("optimizer_step: size mismatch");

    double gnorm = norm2(grad);
    if (!std::isfinite(gnorm)) throw NumericError("optimizer_step: non-finite gradient");
    if (gnorm > config.clip_norm) {
        double scale = config.clip_norm / gnorm;
        for (auto& g : grad) g *= scale;
    }
    if (config.weight_decay != 0.0)
        for (size_t i = 0; i < grad.size(); ++i) grad[i] += config.weight_decay * theta[i];

    state.t += 1;
    double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < theta.size(); ++i) {
        state.m[i] = config.adam_beta1 * state.m[i] + (1.0 - config.adam_beta1) * grad[i];
        state.v[i] = config.adam_beta2 * state.v[i] + (1.0 - config.adam_beta2) * grad[i] * grad[i];
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        theta[i] -= config.lr * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
    return gnorm;
}

namespace {

std::string format17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

const char* kRecordHeader =
    "epoch,step,lambda,curriculum_target,mean_reward,mean_bce,mean_cost,mean_entropy,"
    "mean_value,mean_advantage,actor_loss,critic_loss,total_loss,grad_norm";

} // namespace

std::string records_to_csv(const std::vector<StepRecord>& records) {
    std::string out = kRecordHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.epoch);
        out += ',';
        out += std::to_string(r.step);
        for (double v : {r.lambda, r.curriculum_target, r.mean_reward, r.mean_bce, r.mean_cost,
                         r.mean_entropy, r.mean_value, r.mean_advantage, r.actor_loss,
                         r.critic_loss, r.total_loss, r.grad_norm}) {
            out += ',';
            out += format17(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<StepRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ProtocolError("records csv: empty input");
    if (line != kRecordHeader) throw ProtocolError("records csv: unexpected header");

    std::vector<StepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t start = 0;
        while (true) {
            size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 14) throw ProtocolError("records csv: wrong column count");
        StepRecord r;
        r.epoch = std::atoi(fields[0].c_str());
        r.step = std::atoi(fields[1].c_str());
        double* cols[] = {&r.lambda,      &r.curriculum_target,
                          &r.mean_reward, &r.mean_bce,
                          &r.mean_cost,   &r.mean_entropy,
                          &r.mean_value,  &r.mean_advantage,
                          &r.actor_loss,  &r.critic_loss,
                          &r.total_loss,  &r.grad_norm};
        for (size_t i = 0; i < 12; ++i) {
            char* end = nullptr;
            *cols[i] = std::strtod(fields[i + 2].c_str(), &end);
            if (end == fields[i + 2].c_str())
                throw ProtocolError("records csv: bad number '" + fields[i + 2] + "'");
        }
        records.push_back(r);
    }
    return records;
}

void save_records(const std::vector<StepRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write records '" + path + "'");
    out << records_to_csv(records);
}

std::vector<StepRecord> load_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open records '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return records_from_csv(buf.str());
}

TrainResult train(const World& world, const PoolSet& pools, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    {
        auto errors = validate_train_config(config);
        if (!errors.empty()) {
            std::string joined = "train config invalid:";
            for (const auto& e : errors) joined += " " + e + ";";
            throw ConfigError(joined);
        }
        auto pool_errors = validate_poolset(pools);
        if (!pool_errors.empty()) throw ConfigError("pool set invalid: " + pool_errors.front());
        if (config.dims.descriptor_dim != world.config.descriptor_dim)
            throw ConfigError("agent descriptor_dim " +
                              std::to_string(config.dims.descriptor_dim) +
                              " does not match world descriptor_dim " +
                              std::to_string(world.config.descriptor_dim));
    }

    TrainResult result;
    result.params = AgentParams::init(config.dims, pools, config.seed);
    AdamState adam = AdamState::init(result.params.size());
    Vec grad(result.params.size(), 0.0);
    BudgetController controller = BudgetController::from_config(config);
    int step = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double target = controller.target(epoch, config.epochs);
        auto pairs = make_pairs(world, config.pairs_per_epoch, config.positive_frac,
                                mix_seed(config.seed, fnv1a64("epoch-pairs"),
                                         static_cast<uint64_t>(epoch)));

        for (size_t start = 0; start < pairs.size();
             start += static_cast<size_t>(config.batch_size)) {
            size_t end = std::min(start + config.batch_size, pairs.size());
            std::fill(grad.begin(), grad.end(), 0.0);

            StepRecord rec;
            rec.epoch = epoch;
            rec.step = step;
            rec.curriculum_target = target;
            for (size_t i = start; i < end; ++i) {
                Rng action_rng(mix_seed(config.seed, fnv1a64("action"),
                                        static_cast<uint64_t>(epoch), i));
                SampleOutcome out = compute_gradients(world, pools, pairs[i], result.params,
                                                      controller.lambda, config, action_rng, grad);
                rec.mean_reward += out.reward;
                rec.mean_bce += out.bce;
                rec.mean_cost += out.cost_norm;
                rec.mean_entropy += out.action.entropy;
                rec.mean_value += out.value;
                rec.mean_advantage += out.advantage;
                rec.actor_loss += out.actor_loss;
                rec.critic_loss += out.critic_loss;
            }
            double inv = 1.0 / static_cast<double>(end - start);
            rec.mean_reward *= inv;
            rec.mean_bce *= inv;
            rec.mean_cost *= inv;
            rec.mean_entropy *= inv;
            rec.mean_value *= inv;
            rec.mean_advantage *= inv;
            rec.actor_loss *= inv;
            rec.critic_loss *= inv;
            rec.total_loss = rec.actor_loss + config.critic_alpha * rec.critic_loss;
            for (auto& g : grad) g *= inv;

            if (!std::isfinite(rec.total_loss))
                throw NumericError("train: non-finite loss at step " + std::to_string(step));
            check_finite_grad(grad, result.params);
            rec.grad_norm = optimizer_step(result.params.theta, grad, adam, config);

            controller.update(rec.mean_cost, target);
            rec.lambda = controller.lambda;
            result.records.push_back(rec);
            ++step;
        }
        result.lambda = controller.lambda;
        if (on_epoch) on_epoch(epoch, result);
        log::debug("epoch %d done: lambda=%.6f cost=%.4f reward=%.4f", epoch, controller.lambda,
                   result.records.back().mean_cost, result.records.back().mean_reward);
    }
    result.lambda = controller.lambda;
    return result;
}

} // namespace idselect
