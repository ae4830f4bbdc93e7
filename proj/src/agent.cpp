#include "idselect/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "idselect/errors.hpp"

namespace idselect {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void push_block(std::vector<ParamBlock>& layout, size_t& offset, const std::string& name,
                int rows, int cols) {
    layout.push_back({name, rows, cols, offset});
    offset += static_cast<size_t>(rows) * (cols > 0 ? cols : 1);
}

} // namespace

AgentParams AgentParams::init(const AgentDims& dims, const PoolSet& pools, uint64_t seed) {
    if (dims.descriptor_dim < 1 || dims.feature_dim < 1 || dims.pooled_dim < 1)
        throw ConfigError("agent dims must be positive");

    AgentParams params;
    params.dims = dims;
    for (const auto& pool : pools.pools) {
        params.modalities.push_back(pool.modality);
        params.pool_sizes.push_back(static_cast<int>(pool.models.size()));
    }

    const int d = dims.descriptor_dim;
    const int e = dims.encoder_hidden();
    const int df = dims.feature_dim;
    const int a = dims.attention_dim();
    const int dh = dims.pooled_dim;
    const int h1 = dims.head_hidden1();
    const int h2 = dims.head_hidden2();
    const int hv = dims.value_hidden();

    size_t offset = 0;
    auto& layout = params.layout;
    push_block(layout, offset, "encoder.w1", e, d);
    push_block(layout, offset, "encoder.b1", e, 0);
    push_block(layout, offset, "encoder.w2", df, e);
    push_block(layout, offset, "encoder.b2", df, 0);
    push_block(layout, offset, "attention.w", a, df);
    push_block(layout, offset, "attention.v", a, 0);
    push_block(layout, offset, "projection.w", dh, df);
    push_block(layout, offset, "projection.b", dh, 0);
    for (size_t m = 0; m < params.modalities.size(); ++m) {
        const std::string base = "head." + params.modalities[m] + ".";
        const int n = params.pool_sizes[m];
        push_block(layout, offset, base + "w1", h1, dh);
        push_block(layout, offset, base + "b1", h1, 0);
        push_block(layout, offset, base + "w2", h2, h1);
        push_block(layout, offset, base + "b2", h2, 0);
        push_block(layout, offset, base + "w3", n, h2);
        push_block(layout, offset, base + "b3", n, 0);
    }
    push_block(layout, offset, "value.w1", hv, dh);
    push_block(layout, offset, "value.b1", hv, 0);
    push_block(layout, offset, "value.w2", 1, hv);
    push_block(layout, offset, "value.b2", 1, 0);

    params.theta.assign(offset, 0.0);

    // Xavier-uniform weights, zero biases, in layout order.
    Rng rng(mix_seed(seed, fnv1a64("agent-init")));
    for (size_t i = 0; i < layout.size(); ++i) {
        const auto& b = layout[i];
        if (b.cols == 0) continue;
        double fan_in = b.cols;
        double fan_out = b.rows;
        if (b.name == "attention.v") {
            fan_in = static_cast<double>(b.rows);
            fan_out = 1.0;
        }
        double limit = std::sqrt(6.0 / (fan_in + fan_out));
        double* p = params.theta.data() + b.offset;
        size_t count = static_cast<size_t>(b.rows) * b.cols;
        for (size_t k = 0; k < count; ++k) p[k] = rng.uniform(-limit, limit);
    }
    // attention.v is a vector block but is a weight, not a bias.
    {
        size_t vi = params.idx_attn_v();
        const auto& b = params.layout[vi];
        double limit = std::sqrt(6.0 / (b.rows + 1.0));
        double* p = params.theta.data() + b.offset;
        for (int k = 0; k < b.rows; ++k) p[k] = rng.uniform(-limit, limit);
    }
    return params;
}

std::vector<Vec> encode_frames(const SequenceSample& sample, const AgentParams& params) {
    const int d = params.dims.descriptor_dim;
    for (const auto& frame : sample.frames)
        if (static_cast<int>(frame.size()) != d)
            throw ShapeError("frame dimension " + std::to_string(frame.size()) +
                             " != descriptor_dim " + std::to_string(d));

    auto w1 = params.block(params.idx_enc_w1());
    auto b1 = params.span(params.idx_enc_b1());
    auto w2 = params.block(params.idx_enc_w2());
    auto b2 = params.span(params.idx_enc_b2());

    std::vector<Vec> features;
    features.reserve(sample.frames.size());
    Vec z1(params.dims.encoder_hidden());
    for (const auto& frame : sample.frames) {
        gemv(w1, frame, z1);
        add_inplace(z1, b1);
        tanh_inplace(z1);
        Vec f(params.dims.feature_dim);
        gemv(w2, z1, f);
        add_inplace(f, b2);
        tanh_inplace(f);
        features.push_back(std::move(f));
    }
    return features;
}

PooledRepresentation attention_pool(const std::vector<Vec>& features, const AgentParams& params) {
    if (features.empty()) throw ShapeError("attention_pool: empty sequence");
    const size_t t_count = features.size();
    const int df = params.dims.feature_dim;
    const int a_dim = params.dims.attention_dim();

    auto wa = params.block(params.idx_attn_w());
    auto v = params.span(params.idx_attn_v());
    auto wp = params.block(params.idx_proj_w());
    auto bp = params.span(params.idx_proj_b());

    Vec scores(t_count);
    Vec u(a_dim);
    for (size_t t = 0; t < t_count; ++t) {
        gemv(wa, features[t], u);
        tanh_inplace(u);
        scores[t] = dot(v, u);
    }
    Vec alpha(t_count);
    softmax(scores, alpha);

    Vec c(df, 0.0);
    for (size_t t = 0; t < t_count; ++t)
        for (int i = 0; i < df; ++i) c[i] += alpha[t] * features[t][i];

    PooledRepresentation pooled;
    pooled.h.resize(params.dims.pooled_dim);
    gemv(wp, c, pooled.h);
    add_inplace(pooled.h, bp);
    pooled.attention_weights = std::move(alpha);
    return pooled;
}

namespace {

Vec mlp3_forward(const AgentParams& params, size_t base, std::span<const double> input, Vec& l1,
                 Vec& l2) {
    auto w1 = params.block(base + 0);
    auto b1 = params.span(base + 1);
    auto w2 = params.block(base + 2);
    auto b2 = params.span(base + 3);
    auto w3 = params.block(base + 4);
    auto b3 = params.span(base + 5);

    l1.resize(w1.rows);
    gemv(w1, input, l1);
    add_inplace(l1, b1);
    tanh_inplace(l1);
    l2.resize(w2.rows);
    gemv(w2, l1, l2);
    add_inplace(l2, b2);
    tanh_inplace(l2);
    Vec out(w3.rows);
    gemv(w3, l2, out);
    add_inplace(out, b3);
    return out;
}

} // namespace

std::pair<SelectionDistribution, double> policy_forward(const PooledRepresentation& pooled,
                                                        const AgentParams& params,
                                                        const PoolSet& pools) {
    check_params_match_pools(params, pools);

    std::vector<Vec> logits;
    Vec l1, l2;
    for (size_t m = 0; m < params.modalities.size(); ++m)
        logits.push_back(mlp3_forward(params, params.idx_head(m, 0), pooled.h, l1, l2));

    // value head: tanh hidden, linear output
    auto vw1 = params.block(params.idx_value(0));
    auto vb1 = params.span(params.idx_value(1));
    auto vw2 = params.block(params.idx_value(2));
    auto vb2 = params.span(params.idx_value(3));
    Vec vh(vw1.rows);
    gemv(vw1, pooled.h, vh);
    add_inplace(vh, vb1);
    tanh_inplace(vh);
    double value = dot({vw2.data, static_cast<size_t>(vw2.cols)}, vh) + vb2[0];

    return {distribution_from_logits(std::move(logits)), value};
}

SelectionDistribution distribution_from_logits(std::vector<Vec> logits) {
    SelectionDistribution dist;
    for (auto& z : logits) {
        ModalityDistribution md;
        md.p.resize(z.size());
        md.logp.resize(z.size());
        softmax(z, md.p);
        log_softmax(z, md.logp);
        md.logits = std::move(z);
        dist.dists.push_back(std::move(md));
    }
    return dist;
}

ModalityDistribution modality_distribution_from_probs(const Vec& p) {
    double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (!(total > 0.0)) throw DegenerateDistributionError("probability vector sums to zero");
    Vec logits(p.size());
    for (size_t i = 0; i < p.size(); ++i) logits[i] = p[i] > 0.0 ? std::log(p[i]) : kNegInf;
    ModalityDistribution md;
    md.p.resize(p.size());
    md.logp.resize(p.size());
    for (size_t i = 0; i < p.size(); ++i) {
        md.p[i] = p[i] / total;
        md.logp[i] = p[i] > 0.0 ? std::log(p[i]) - std::log(total) : kNegInf;
    }
    md.logits = std::move(logits);
    return md;
}

ForwardTrace forward_trace(const SequenceSample& sample, const AgentParams& params) {
    ForwardTrace trace;
    trace.x = sample.frames;
    if (trace.x.empty()) throw ShapeError("forward_trace: empty sequence");
    const int d = params.dims.descriptor_dim;
    for (const auto& frame : trace.x)
        if (static_cast<int>(frame.size()) != d)
            throw ShapeError("frame dimension " + std::to_string(frame.size()) +
                             " != descriptor_dim " + std::to_string(d));

    const size_t t_count = trace.x.size();
    auto w1 = params.block(params.idx_enc_w1());
    auto b1 = params.span(params.idx_enc_b1());
    auto w2 = params.block(params.idx_enc_w2());
    auto b2 = params.span(params.idx_enc_b2());
    auto wa = params.block(params.idx_attn_w());
    auto v = params.span(params.idx_attn_v());
    auto wp = params.block(params.idx_proj_w());
    auto bp = params.span(params.idx_proj_b());

    trace.z1.resize(t_count);
    trace.f.resize(t_count);
    trace.u.resize(t_count);
    trace.e.resize(t_count);
    for (size_t t = 0; t < t_count; ++t) {
        trace.z1[t].resize(params.dims.encoder_hidden());
        gemv(w1, trace.x[t], trace.z1[t]);
        add_inplace(trace.z1[t], b1);
        tanh_inplace(trace.z1[t]);
        trace.f[t].resize(params.dims.feature_dim);
        gemv(w2, trace.z1[t], trace.f[t]);
        add_inplace(trace.f[t], b2);
        tanh_inplace(trace.f[t]);
        trace.u[t].resize(params.dims.attention_dim());
        gemv(wa, trace.f[t], trace.u[t]);
        tanh_inplace(trace.u[t]);
        trace.e[t] = dot(v, trace.u[t]);
    }
    trace.alpha.resize(t_count);
    softmax(trace.e, trace.alpha);
    trace.c.assign(params.dims.feature_dim, 0.0);
    for (size_t t = 0; t < t_count; ++t)
        for (int i = 0; i < params.dims.feature_dim; ++i)
            trace.c[i] += trace.alpha[t] * trace.f[t][i];
    trace.h.resize(params.dims.pooled_dim);
    gemv(wp, trace.c, trace.h);
    add_inplace(trace.h, bp);

    trace.head_l1.resize(params.modalities.size());
    trace.head_l2.resize(params.modalities.size());
    trace.logits.resize(params.modalities.size());
    for (size_t m = 0; m < params.modalities.size(); ++m)
        trace.logits[m] =
            mlp3_forward(params, params.idx_head(m, 0), trace.h, trace.head_l1[m], trace.head_l2[m]);

    auto vw1 = params.block(params.idx_value(0));
    auto vb1 = params.span(params.idx_value(1));
    auto vw2 = params.block(params.idx_value(2));
    auto vb2 = params.span(params.idx_value(3));
    trace.value_l1.resize(vw1.rows);
    gemv(vw1, trace.h, trace.value_l1);
    add_inplace(trace.value_l1, vb1);
    tanh_inplace(trace.value_l1);
    trace.value = dot({vw2.data, static_cast<size_t>(vw2.cols)}, trace.value_l1) + vb2[0];
    return trace;
}

SelectionDistribution distribution_from_trace(const ForwardTrace& trace) {
    return distribution_from_logits(trace.logits);
}

namespace {

// Masked log-softmax over the remaining logits. Masked entries get
// logq = -inf, q = 0. Throws when no probability mass remains.
void masked_logsoftmax(const Vec& logits, const std::vector<char>& masked, Vec& logq, Vec& q) {
    double m = kNegInf;
    for (size_t i = 0; i < logits.size(); ++i)
        if (!masked[i]) m = std::max(m, logits[i]);
    if (m == kNegInf)
        throw DegenerateDistributionError("all remaining probability mass is masked");
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i)
        if (!masked[i]) sum += std::exp(logits[i] - m);
    double lse = m + std::log(sum);
    logq.assign(logits.size(), kNegInf);
    q.assign(logits.size(), 0.0);
    for (size_t i = 0; i < logits.size(); ++i) {
        if (masked[i]) continue;
        logq[i] = logits[i] - lse;
        q[i] = std::exp(logq[i]);
    }
}

void check_dist_matches_pools(const SelectionDistribution& dist, const PoolSet& pools) {
    if (dist.dists.size() != pools.pools.size())
        throw ShapeError("distribution covers " + std::to_string(dist.dists.size()) +
                         " modalities, pools have " + std::to_string(pools.pools.size()));
    for (size_t m = 0; m < pools.pools.size(); ++m)
        if (dist.dists[m].p.size() != pools.pools[m].models.size())
            throw ShapeError("distribution width mismatch for pool '" + pools.pools[m].modality +
                             "'");
}

// Sequential log-probability of a fixed pick order.
double sequence_logprob(const ModalityDistribution& dist, const std::vector<int>& picks) {
    std::vector<char> masked(dist.logits.size(), 0);
    Vec logq, q;
    double lp = 0.0;
    for (int pick : picks) {
        masked_logsoftmax(dist.logits, masked, logq, q);
        lp += logq[pick];
        masked[pick] = 1;
    }
    return lp;
}

void enumerate_recursive(const ModalityDistribution& dist, int remaining_draws,
                         std::vector<char>& masked, std::vector<int>& prefix, double logp_prefix,
                         std::vector<EnumeratedAction>& out) {
    if (remaining_draws == 0) {
        out.push_back({prefix, logp_prefix});
        return;
    }
    Vec logq, q;
    masked_logsoftmax(dist.logits, masked, logq, q);
    for (size_t i = 0; i < dist.logits.size(); ++i) {
        if (masked[i]) continue;
        masked[i] = 1;
        prefix.push_back(static_cast<int>(i));
        enumerate_recursive(dist, remaining_draws - 1, masked, prefix, logp_prefix + logq[i], out);
        prefix.pop_back();
        masked[i] = 0;
    }
}

} // namespace

std::vector<EnumeratedAction> enumerate_actions(const ModalityDistribution& dist, int select_k) {
    if (select_k < 1 || select_k > static_cast<int>(dist.logits.size()))
        throw InvalidActionError("select_k out of range for enumeration");
    std::vector<EnumeratedAction> out;
    std::vector<char> masked(dist.logits.size(), 0);
    std::vector<int> prefix;
    enumerate_recursive(dist, select_k, masked, prefix, 0.0, out);
    return out;
}

ActionSet sample_action(const SelectionDistribution& dist, const PoolSet& pools, Rng& rng) {
    check_dist_matches_pools(dist, pools);
    ActionSet action;
    action.picks.resize(pools.pools.size());
    double log_prob = 0.0;
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        const auto& md = dist.dists[m];
        std::vector<char> masked(md.logits.size(), 0);
        Vec logq, q;
        for (int draw = 0; draw < pools.pools[m].select_k; ++draw) {
            masked_logsoftmax(md.logits, masked, logq, q);
            double u = rng.uniform();
            double cum = 0.0;
            int pick = -1;
            for (size_t i = 0; i < q.size(); ++i) {
                if (masked[i]) continue;
                cum += q[i];
                pick = static_cast<int>(i);
                if (u < cum) break;
            }
            log_prob += logq[pick];
            masked[pick] = 1;
            action.picks[m].push_back(pick);
        }
    }
    action.log_prob = log_prob;
    action.entropy = joint_entropy(dist, pools);
    return action;
}

ActionSet greedy_action(const SelectionDistribution& dist, const PoolSet& pools) {
    check_dist_matches_pools(dist, pools);
    ActionSet action;
    action.picks.resize(pools.pools.size());
    double log_prob = 0.0;
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        const auto& md = dist.dists[m];
        std::vector<int> order(md.p.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (md.p[a] != md.p[b]) return md.p[a] > md.p[b];
            return a < b;
        });
        order.resize(pools.pools[m].select_k);
        action.picks[m] = order;
        log_prob += sequence_logprob(md, order);
    }
    action.log_prob = log_prob;
    action.entropy = joint_entropy(dist, pools);
    return action;
}

double joint_entropy(const SelectionDistribution& dist, const PoolSet& pools) {
    check_dist_matches_pools(dist, pools);
    double total = 0.0;
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        for (const auto& act : enumerate_actions(dist.dists[m], pools.pools[m].select_k)) {
            double p = std::exp(act.logp);
            if (p > 0.0) total -= p * act.logp;
        }
    }
    return total;
}

double action_logprob(const SelectionDistribution& dist, const PoolSet& pools,
                      const ActionSet& action) {
    check_dist_matches_pools(dist, pools);
    validate_action(action, pools);
    double lp = 0.0;
    for (size_t m = 0; m < pools.pools.size(); ++m)
        lp += sequence_logprob(dist.dists[m], action.picks[m]);
    return lp;
}

Vec action_logprob_grad(const ModalityDistribution& dist, const std::vector<int>& picks) {
    Vec grad(dist.logits.size(), 0.0);
    std::vector<char> masked(dist.logits.size(), 0);
    Vec logq, q;
    for (int pick : picks) {
        masked_logsoftmax(dist.logits, masked, logq, q);
        for (size_t i = 0; i < grad.size(); ++i) grad[i] -= q[i];
        grad[pick] += 1.0;
        masked[pick] = 1;
    }
    return grad;
}

Vec entropy_grad(const ModalityDistribution& dist, int select_k) {
    // dH/dz = -sum_a P_a * logP_a * dlogP_a/dz (the +1 term cancels because
    // the P_a sum to one for every z).
    Vec grad(dist.logits.size(), 0.0);
    for (const auto& act : enumerate_actions(dist, select_k)) {
        double p = std::exp(act.logp);
        if (p <= 0.0) continue;
        Vec glp = action_logprob_grad(dist, act.picks);
        for (size_t i = 0; i < grad.size(); ++i) grad[i] -= p * act.logp * glp[i];
    }
    return grad;
}

void backprop(const ForwardTrace& trace, const AgentParams& params,
              const std::vector<Vec>& dlogits, double dvalue, Vec& grad) {
    if (grad.size() != params.size()) throw ShapeError("gradient vector size mismatch");
    if (dlogits.size() != params.modalities.size())
        throw ShapeError("dlogits count mismatch");

    const size_t t_count = trace.x.size();
    const int df = params.dims.feature_dim;
    Vec dh(params.dims.pooled_dim, 0.0);

    auto gblock = [&](size_t i) -> MatView {
        const auto& b = params.layout[i];
        return {grad.data() + b.offset, b.rows, b.cols > 0 ? b.cols : 1};
    };
    auto gspan = [&](size_t i) -> std::span<double> {
        const auto& b = params.layout[i];
        return {grad.data() + b.offset,
                static_cast<size_t>(b.rows) * (b.cols > 0 ? b.cols : 1)};
    };

    // value head
    {
        auto vw1 = params.block(params.idx_value(0));
        auto vw2 = params.block(params.idx_value(2));
        std::span<const double> vw2_row{vw2.data, static_cast<size_t>(vw2.cols)};

        auto g_vw2 = gspan(params.idx_value(2));
        auto g_vb2 = gspan(params.idx_value(3));
        for (int i = 0; i < vw2.cols; ++i) g_vw2[i] += dvalue * trace.value_l1[i];
        g_vb2[0] += dvalue;

        Vec dpre(vw1.rows);
        for (int i = 0; i < vw1.rows; ++i)
            dpre[i] = dvalue * vw2_row[i] * (1.0 - trace.value_l1[i] * trace.value_l1[i]);
        outer_add(gblock(params.idx_value(0)), dpre, trace.h);
        add_inplace(gspan(params.idx_value(1)), dpre);
        gemv_t_add(vw1, dpre, dh);
    }

    // policy heads
    for (size_t m = 0; m < params.modalities.size(); ++m) {
        size_t base = params.idx_head(m, 0);
        auto w1 = params.block(base + 0);
        auto w2 = params.block(base + 2);
        auto w3 = params.block(base + 4);
        const Vec& l1 = trace.head_l1[m];
        const Vec& l2 = trace.head_l2[m];
        const Vec& dz = dlogits[m];

        outer_add(gblock(base + 4), dz, l2);
        add_inplace(gspan(base + 5), dz);
        Vec dl2(w2.rows, 0.0);
        gemv_t_add(w3, dz, dl2);
        for (int i = 0; i < w2.rows; ++i) dl2[i] *= 1.0 - l2[i] * l2[i];

        outer_add(gblock(base + 2), dl2, l1);
        add_inplace(gspan(base + 3), dl2);
        Vec dl1(w1.rows, 0.0);
        gemv_t_add(w2, dl2, dl1);
        for (int i = 0; i < w1.rows; ++i) dl1[i] *= 1.0 - l1[i] * l1[i];

        outer_add(gblock(base + 0), dl1, trace.h);
        add_inplace(gspan(base + 1), dl1);
        gemv_t_add(w1, dl1, dh);
    }

    // projection: h = Wp c + bp
    Vec dc(df, 0.0);
    {
        auto wp = params.block(params.idx_proj_w());
        outer_add(gblock(params.idx_proj_w()), dh, trace.c);
        add_inplace(gspan(params.idx_proj_b()), dh);
        gemv_t_add(wp, dh, dc);
    }

    // attention
    std::vector<Vec> df_t(t_count, Vec(df, 0.0));
    {
        auto wa = params.block(params.idx_attn_w());
        auto v = params.span(params.idx_attn_v());
        Vec dalpha(t_count);
        for (size_t t = 0; t < t_count; ++t) {
            dalpha[t] = dot(dc, trace.f[t]);
            for (int i = 0; i < df; ++i) df_t[t][i] += trace.alpha[t] * dc[i];
        }
        double weighted = 0.0;
        for (size_t t = 0; t < t_count; ++t) weighted += trace.alpha[t] * dalpha[t];
        auto g_v = gspan(params.idx_attn_v());
        auto g_wa = gblock(params.idx_attn_w());
        Vec dpre(params.dims.attention_dim());
        for (size_t t = 0; t < t_count; ++t) {
            double de = trace.alpha[t] * (dalpha[t] - weighted);
            for (int i = 0; i < params.dims.attention_dim(); ++i) {
                g_v[i] += de * trace.u[t][i];
                dpre[i] = de * v[i] * (1.0 - trace.u[t][i] * trace.u[t][i]);
            }
            outer_add(g_wa, dpre, trace.f[t]);
            gemv_t_add(wa, dpre, df_t[t]);
        }
    }

    // encoder, per frame
    {
        auto w1 = params.block(params.idx_enc_w1());
        auto w2 = params.block(params.idx_enc_w2());
        Vec dpre2(params.dims.feature_dim);
        Vec dz1(params.dims.encoder_hidden());
        Vec dpre1(params.dims.encoder_hidden());
        for (size_t t = 0; t < t_count; ++t) {
            for (int i = 0; i < params.dims.feature_dim; ++i)
                dpre2[i] = df_t[t][i] * (1.0 - trace.f[t][i] * trace.f[t][i]);
            outer_add(gblock(params.idx_enc_w2()), dpre2, trace.z1[t]);
            add_inplace(gspan(params.idx_enc_b2()), dpre2);
            std::fill(dz1.begin(), dz1.end(), 0.0);
            gemv_t_add(w2, dpre2, dz1);
            for (int i = 0; i < params.dims.encoder_hidden(); ++i)
                dpre1[i] = dz1[i] * (1.0 - trace.z1[t][i] * trace.z1[t][i]);
            outer_add(gblock(params.idx_enc_w1()), dpre1, trace.x[t]);
            add_inplace(gspan(params.idx_enc_b1()), dpre1);
        }
        (void)w1;
    }
}

void check_params_match_pools(const AgentParams& params, const PoolSet& pools) {
    if (params.modalities.size() != pools.pools.size())
        throw ShapeError("checkpoint covers " + std::to_string(params.modalities.size()) +
                         " modalities, pools have " + std::to_string(pools.pools.size()));
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        if (params.modalities[m] != pools.pools[m].modality)
            throw ShapeError("head '" + params.modalities[m] + "' does not match pool '" +
                             pools.pools[m].modality + "'");
        if (params.pool_sizes[m] != static_cast<int>(pools.pools[m].models.size()))
            throw ShapeError("head '" + params.modalities[m] + "' expects " +
                             std::to_string(params.pool_sizes[m]) + " logits, pool has " +
                             std::to_string(pools.pools[m].models.size()) + " models");
    }
}

std::string checkpoint_to_json(const AgentParams& params) {
    nlohmann::json manifest = nlohmann::json::array();
    for (const auto& b : params.layout)
        manifest.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
    nlohmann::json doc{
        {"version", 1},
        {"dims",
         {{"descriptor_dim", params.dims.descriptor_dim},
          {"feature_dim", params.dims.feature_dim},
          {"pooled_dim", params.dims.pooled_dim}}},
        {"modalities", params.modalities},
        {"pool_sizes", params.pool_sizes},
        {"manifest", std::move(manifest)},
        {"params", params.theta},
    };
    return doc.dump(1);
}

AgentParams checkpoint_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("checkpoint: ") + e.what());
    }
    try {
        if (doc.at("version").get<int>() != 1)
            throw ConfigError("checkpoint: unsupported version");
        AgentDims dims;
        dims.descriptor_dim = doc.at("dims").at("descriptor_dim").get<int>();
        dims.feature_dim = doc.at("dims").at("feature_dim").get<int>();
        dims.pooled_dim = doc.at("dims").at("pooled_dim").get<int>();

        // Rebuild the layout through init on a shape-compatible pool set,
        // then overwrite the parameter vector.
        PoolSet shape;
        auto modalities = doc.at("modalities").get<std::vector<std::string>>();
        auto pool_sizes = doc.at("pool_sizes").get<std::vector<int>>();
        if (modalities.size() != pool_sizes.size())
            throw ConfigError("checkpoint: modalities/pool_sizes length mismatch");
        for (size_t m = 0; m < modalities.size(); ++m) {
            ModalityPool pool;
            pool.modality = modalities[m];
            for (int i = 0; i < pool_sizes[m]; ++i)
                pool.models.push_back(
                    {modalities[m] + "_" + std::to_string(i), modalities[m], 1.0, 1.0, 1});
            shape.pools.push_back(std::move(pool));
        }
        AgentParams params = AgentParams::init(dims, shape, 0);

        auto theta = doc.at("params").get<Vec>();
        if (theta.size() != params.theta.size())
            throw ConfigError("checkpoint: parameter count " + std::to_string(theta.size()) +
                              " does not match manifest total " +
                              std::to_string(params.theta.size()));
        const auto& manifest = doc.at("manifest");
        if (manifest.size() != params.layout.size())
            throw ConfigError("checkpoint: manifest block count mismatch");
        for (size_t i = 0; i < params.layout.size(); ++i) {
            if (manifest[i].at("name").get<std::string>() != params.layout[i].name ||
                manifest[i].at("rows").get<int>() != params.layout[i].rows ||
                manifest[i].at("cols").get<int>() != params.layout[i].cols)
                throw ConfigError("checkpoint: manifest block '" + params.layout[i].name +
                                  "' mismatch");
        }
        params.theta = std::move(theta);
        return params;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const AgentParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
    out << checkpoint_to_json(params) << '\n';
}

AgentParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_json(buf.str());
}

} // namespace idselect
