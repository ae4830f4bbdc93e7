#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idselect/action.hpp"
#include "idselect/linalg.hpp"
#include "idselect/pool.hpp"
#include "idselect/rng.hpp"
#include "idselect/simworld.hpp"

namespace idselect {

// Network widths. Hidden widths are derived from the three documented dims
// so the checkpoint manifest stays small; see AgentParams for the layout.
struct AgentDims {
    int descriptor_dim = 16; // d: frame descriptor width
    int feature_dim = 32;    // D_f: frame feature width
    int pooled_dim = 32;     // D_h: video-level representation width

    int encoder_hidden() const { return feature_dim; }
    int attention_dim() const { return feature_dim; }
    int head_hidden1() const { return pooled_dim / 2 > 2 ? pooled_dim / 2 : 2; }
    int head_hidden2() const { return pooled_dim / 4 > 2 ? pooled_dim / 4 : 2; }
    int value_hidden() const { return pooled_dim / 2 > 2 ? pooled_dim / 2 : 2; }
};

struct ParamBlock {
    std::string name;
    int rows = 0;
    int cols = 0; // 0 marks a bias/vector block
    size_t offset = 0;
};

// All trainable parameters in one flat vector with a fixed block layout:
//   encoder.w1/b1/w2/b2        frame MLP, tanh on both layers
//   attention.w, attention.v   additive attention scores v . tanh(W f_t)
//   projection.w/b             pooled feature -> D_h
//   head.<modality>.w1..b3     per-modality 3-layer MLP -> pool logits
//   value.w1/b1/w2/b2          pooled -> scalar value estimate
// The layout order doubles as the canonical flattening order for gradient
// checks and checkpoints.
struct AgentParams {
    AgentDims dims;
    std::vector<std::string> modalities; // pool order
    std::vector<int> pool_sizes;
    std::vector<ParamBlock> layout;
    Vec theta;

    static AgentParams init(const AgentDims& dims, const PoolSet& pools, uint64_t seed);

    size_t size() const { return theta.size(); }

    MatView block(size_t i) {
        auto& b = layout[i];
        return {theta.data() + b.offset, b.rows, b.cols > 0 ? b.cols : 1};
    }
    ConstMatView block(size_t i) const {
        const auto& b = layout[i];
        return {theta.data() + b.offset, b.rows, b.cols > 0 ? b.cols : 1};
    }
    std::span<const double> span(size_t i) const {
        const auto& b = layout[i];
        return {theta.data() + b.offset, b.rows * static_cast<size_t>(b.cols > 0 ? b.cols : 1)};
    }

    // Block indices follow from the fixed layout.
    size_t idx_enc_w1() const { return 0; }
    size_t idx_enc_b1() const { return 1; }
    size_t idx_enc_w2() const { return 2; }
    size_t idx_enc_b2() const { return 3; }
    size_t idx_attn_w() const { return 4; }
    size_t idx_attn_v() const { return 5; }
    size_t idx_proj_w() const { return 6; }
    size_t idx_proj_b() const { return 7; }
    size_t idx_head(size_t modality, size_t part) const { return 8 + modality * 6 + part; }
    size_t idx_value(size_t part) const { return 8 + modalities.size() * 6 + part; }
};

struct PooledRepresentation {
    Vec h;                 // D_h
    Vec attention_weights; // T, on the simplex
};

// Per-modality selection distribution. Probabilities come from softmax of
// the head logits; log-probabilities are kept from log-softmax so no log of
// a stored probability is ever taken.
struct ModalityDistribution {
    Vec logits;
    Vec p;
    Vec logp;
};

struct SelectionDistribution {
    std::vector<ModalityDistribution> dists; // pool order
};

SelectionDistribution distribution_from_logits(std::vector<Vec> logits);
// For handcrafted tests: logits = log p (zero entries allowed).
ModalityDistribution modality_distribution_from_probs(const Vec& p);

// Intermediate activations of one forward pass, kept for backprop.
struct ForwardTrace {
    std::vector<Vec> x;  // T frames
    std::vector<Vec> z1; // encoder hidden (post-tanh)
    std::vector<Vec> f;  // frame features (post-tanh)
    std::vector<Vec> u;  // attention tanh(W f_t)
    Vec e;               // attention scores
    Vec alpha;           // attention weights
    Vec c;               // attention-weighted feature sum
    Vec h;               // pooled representation
    std::vector<Vec> head_l1, head_l2;
    std::vector<Vec> logits; // per modality
    Vec value_l1;
    double value = 0.0;
};

// Frame descriptors -> T feature vectors of width D_f.
std::vector<Vec> encode_frames(const SequenceSample& sample, const AgentParams& params);

// Additive attention over frame features; h is the projected weighted sum.
PooledRepresentation attention_pool(const std::vector<Vec>& features, const AgentParams& params);

// Softmax selection distributions per modality plus the value estimate.
std::pair<SelectionDistribution, double> policy_forward(const PooledRepresentation& pooled,
                                                        const AgentParams& params,
                                                        const PoolSet& pools);

// Full forward pass retaining intermediates.
ForwardTrace forward_trace(const SequenceSample& sample, const AgentParams& params);
SelectionDistribution distribution_from_trace(const ForwardTrace& trace);

// select_k sequential categorical draws per modality; after each draw the
// chosen index is masked and the remainder renormalized (computed as a
// masked log-softmax over the remaining logits).
ActionSet sample_action(const SelectionDistribution& dist, const PoolSet& pools, Rng& rng);

// Deterministic top-k by probability, ties to the lowest index. log_prob
// and entropy follow the induced draw order.
ActionSet greedy_action(const SelectionDistribution& dist, const PoolSet& pools);

// Entropy of the joint action distribution: sum over modalities of the
// sequential-factorization entropy, enumerated exactly.
double joint_entropy(const SelectionDistribution& dist, const PoolSet& pools);

// All ordered index sequences of length select_k with their joint
// log-probabilities under sequential masked sampling.
struct EnumeratedAction {
    std::vector<int> picks;
    double logp;
};
std::vector<EnumeratedAction> enumerate_actions(const ModalityDistribution& dist, int select_k);

// Joint log-probability of an existing pick set under the sequential
// factorization (sum over modalities and draws).
double action_logprob(const SelectionDistribution& dist, const PoolSet& pools,
                      const ActionSet& action);

// d log pi(picks) / d logits for one modality (exact, any select_k).
Vec action_logprob_grad(const ModalityDistribution& dist, const std::vector<int>& picks);

// d H / d logits for one modality's sequential-factorization entropy.
Vec entropy_grad(const ModalityDistribution& dist, int select_k);

// Accumulate gradients of a scalar loss into `grad` (layout of AgentParams),
// given dL/dlogits per modality and dL/dvalue for this trace.
void backprop(const ForwardTrace& trace, const AgentParams& params,
              const std::vector<Vec>& dlogits, double dvalue, Vec& grad);

// Versioned JSON checkpoint: dims, pool shape, flattening manifest, params.
void save_checkpoint(const AgentParams& params, const std::string& path);
AgentParams load_checkpoint(const std::string& path);
std::string checkpoint_to_json(const AgentParams& params);
AgentParams checkpoint_from_json(const std::string& text);

// Throws ShapeError naming the first head whose width disagrees with pools.
void check_params_match_pools(const AgentParams& params, const PoolSet& pools);

} // namespace idselect
