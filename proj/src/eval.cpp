#include "idselect/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "json.hpp"

#include "idselect/errors.hpp"
#include "idselect/rng.hpp"
#include "idselect/training.hpp"

namespace idselect {

namespace {

std::atomic<int> g_eval_threads{1};

// Block-partitions [0, n) across eval_threads() workers. Work items must be
// independent; callers reduce results in index order afterwards.
void parallel_for(size_t n, const std::function<void(size_t)>& body) {
    int workers = g_eval_threads.load();
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    size_t count = std::min<size_t>(workers, n);
    std::vector<std::thread> threads;
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    for (size_t t = 0; t < count; ++t)
        threads.emplace_back([&] {
            try {
                for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

void validate_matrix(const ScoreMatrix& matrix) {
    if (matrix.scores.empty() || matrix.gallery_identities.empty())
        throw ProtocolError("score matrix is empty");
    if (matrix.scores.size() != matrix.probe_identities.size())
        throw ProtocolError("score matrix row count != probe count");
    for (const auto& row : matrix.scores) {
        if (row.size() != matrix.gallery_identities.size())
            throw ProtocolError("score matrix row width != gallery count");
        for (double v : row)
            if (!std::isfinite(v)) throw ProtocolError("score matrix has a non-finite entry");
    }
    for (int pid : matrix.probe_identities) {
        bool present = std::find(matrix.gallery_identities.begin(),
                                 matrix.gallery_identities.end(),
                                 pid) != matrix.gallery_identities.end();
        if (!present) throw ProtocolError("probe identity missing from gallery");
    }
}

// Lowest column index among the maxima.
int best_column(const Vec& row) {
    int best = 0;
    for (size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = static_cast<int>(j);
    return best;
}

// AP for one probe row under descending-score order, ties to the lowest
// column index: mean over relevant columns of precision at their rank.
double average_precision_row(const Vec& row, const std::vector<int>& gallery_ids, int probe_id) {
    double ap = 0.0;
    int n_rel = 0;
    for (size_t c = 0; c < row.size(); ++c) {
        if (gallery_ids[c] != probe_id) continue;
        ++n_rel;
        int rank = 1;
        int rel_at_or_above = 1;
        for (size_t j = 0; j < row.size(); ++j) {
            if (j == c) continue;
            bool above = row[j] > row[c] || (row[j] == row[c] && j < c);
            if (!above) continue;
            ++rank;
            if (gallery_ids[j] == probe_id) ++rel_at_or_above;
        }
        ap += static_cast<double>(rel_at_or_above) / rank;
    }
    return ap / n_rel;
}

} // namespace

double rank1(const ScoreMatrix& matrix) {
    validate_matrix(matrix);
    int hits = 0;
    for (size_t p = 0; p < matrix.scores.size(); ++p) {
        int col = best_column(matrix.scores[p]);
        if (matrix.gallery_identities[col] == matrix.probe_identities[p]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(matrix.scores.size());
}

double mean_average_precision(const ScoreMatrix& matrix) {
    validate_matrix(matrix);
    double total = 0.0;
    for (size_t p = 0; p < matrix.scores.size(); ++p)
        total += average_precision_row(matrix.scores[p], matrix.gallery_identities,
                                       matrix.probe_identities[p]);
    return total / static_cast<double>(matrix.scores.size());
}

std::vector<const SequenceSample*> gallery_split(const World& world) {
    std::vector<const SequenceSample*> gallery;
    std::vector<char> seen(world.identity_count(), 0);
    for (const auto& s : world.samples) {
        if (seen[s.identity]) continue;
        seen[s.identity] = 1;
        gallery.push_back(&s);
    }
    return gallery;
}

std::vector<const SequenceSample*> probe_split(const World& world) {
    std::vector<const SequenceSample*> probes;
    std::vector<char> seen(world.identity_count(), 0);
    for (const auto& s : world.samples) {
        if (seen[s.identity])
            probes.push_back(&s);
        else
            seen[s.identity] = 1;
    }
    return probes;
}

void set_eval_threads(int n) { g_eval_threads.store(n < 1 ? 1 : n); }

int eval_threads() { return g_eval_threads.load(); }

namespace {

std::vector<std::vector<int>> canonical_picks(const ActionSet& action) {
    auto picks = action.picks;
    for (auto& p : picks) std::sort(p.begin(), p.end());
    return picks;
}

std::string combo_key(const PoolSet& pools, const std::vector<std::vector<int>>& picks) {
    std::string key;
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        if (m) key += '|';
        key += pools.pools[m].modality;
        key += ':';
        for (size_t i = 0; i < picks[m].size(); ++i) {
            if (i) key += '+';
            key += std::to_string(picks[m][i]);
        }
    }
    return key;
}

std::vector<char> active_mask(const PoolSet& pools, const std::vector<std::string>& active) {
    std::vector<char> mask(pools.pools.size(), active.empty() ? 1 : 0);
    for (const auto& name : active) {
        bool found = false;
        for (size_t m = 0; m < pools.pools.size(); ++m)
            if (pools.pools[m].modality == name) {
                mask[m] = 1;
                found = true;
            }
        if (!found) throw ConfigError("active modality '" + name + "' has no pool");
    }
    return mask;
}

EvalReport evaluate_with_actions(const World& world, const PoolSet& pools,
                                 const std::function<ActionSet(const SequenceSample&, size_t)>& act,
                                 const std::vector<std::string>& active) {
    auto mask = active_mask(pools, active);
    auto gallery = gallery_split(world);
    auto probes = probe_split(world);
    if (probes.empty()) throw ProtocolError("world has no probe samples");
    int n_active = 0;
    for (char m : mask) n_active += m;
    if (n_active == 0) throw ConfigError("no active modality to fuse");

    ScoreMatrix matrix;
    for (const auto* g : gallery) matrix.gallery_identities.push_back(g->identity);

    EvalReport report;
    report.n_probes = static_cast<int>(probes.size());
    report.n_gallery = static_cast<int>(gallery.size());
    for (const auto& pool : pools.pools) report.modality_cost.push_back({pool.modality, 0.0});
    std::map<std::string, ComboCount> histogram;

    struct ProbeEval {
        ActionSet action;
        Vec row;
        long long calls = 0;
    };
    std::vector<ProbeEval> per_probe(probes.size());
    parallel_for(probes.size(), [&](size_t pi) {
        const SequenceSample* probe = probes[pi];
        ProbeEval& pe = per_probe[pi];
        pe.action = act(*probe, pi);
        validate_action(pe.action, pools);

        pe.row.resize(gallery.size());
        for (size_t gi = 0; gi < gallery.size(); ++gi) {
            PairSample pair;
            pair.probe = probe;
            pair.gallery = gallery[gi];
            pair.label = probe->identity == gallery[gi]->identity ? 1 : 0;
            double fused = 0.0;
            for (size_t m = 0; m < pools.pools.size(); ++m) {
                if (!mask[m]) continue;
                double msum = 0.0;
                for (int pick : pe.action.picks[m]) {
                    msum += similarity_oracle(world, pools.pools[m].models[pick], pair);
                    ++pe.calls;
                }
                fused += msum / static_cast<double>(pe.action.picks[m].size());
            }
            pe.row[gi] = fused / n_active;
        }
    });

    for (size_t pi = 0; pi < probes.size(); ++pi) {
        ProbeEval& pe = per_probe[pi];
        matrix.scores.push_back(std::move(pe.row));
        matrix.probe_identities.push_back(probes[pi]->identity);
        report.oracle_calls += pe.calls;

        report.avg_cost_norm += normalized_cost(pe.action, pools);
        report.avg_gflops += total_gflops(pe.action, pools);
        for (size_t m = 0; m < pools.pools.size(); ++m)
            for (int pick : pe.action.picks[m])
                report.modality_cost[m].avg_gflops += pools.pools[m].models[pick].cost_gflops;

        auto picks = canonical_picks(pe.action);
        std::string key = combo_key(pools, picks);
        auto it = histogram.find(key);
        if (it == histogram.end()) {
            ComboCount cc;
            cc.key = key;
            cc.picks = picks;
            cc.count = 1;
            cc.gflops = total_gflops(ActionSet::fixed(picks), pools);
            histogram.emplace(key, std::move(cc));
        } else {
            it->second.count += 1;
        }
    }

    report.avg_cost_norm /= report.n_probes;
    report.avg_gflops /= report.n_probes;
    for (auto& mc : report.modality_cost) mc.avg_gflops /= report.n_probes;
    report.rank1 = rank1(matrix);
    report.mean_ap = mean_average_precision(matrix);
    for (auto& [key, cc] : histogram) report.histogram.push_back(std::move(cc));
    return report;
}

ActionSet greedy_for_probe(const SequenceSample& probe, const PoolSet& pools,
                           const AgentParams& params) {
    auto features = encode_frames(probe, params);
    auto pooled = attention_pool(features, params);
    auto [dist, value] = policy_forward(pooled, params, pools);
    (void)value;
    return greedy_action(dist, pools);
}

} // namespace

EvalReport evaluate_policy(const World& world, const PoolSet& pools, const AgentParams& params,
                           const std::vector<std::string>& active_modalities) {
    check_params_match_pools(params, pools);
    return evaluate_with_actions(
        world, pools,
        [&](const SequenceSample& probe, size_t) { return greedy_for_probe(probe, pools, params); },
        active_modalities);
}

EvalReport evaluate_fixed_combo(const World& world, const PoolSet& pools,
                                const std::vector<std::vector<int>>& picks) {
    ActionSet action = ActionSet::fixed(picks);
    validate_action(action, pools);
    return evaluate_with_actions(
        world, pools, [&](const SequenceSample&, size_t) { return action; }, {});
}

EvalReport evaluate_random(const World& world, const PoolSet& pools, uint64_t seed) {
    return evaluate_with_actions(
        world, pools,
        [&](const SequenceSample&, size_t pi) {
            Rng rng(mix_seed(seed, fnv1a64("random-combo"), pi));
            ActionSet action;
            for (const auto& pool : pools.pools) {
                // partial Fisher-Yates gives a uniform k-subset
                std::vector<int> order(pool.models.size());
                std::iota(order.begin(), order.end(), 0);
                for (int i = 0; i < pool.select_k; ++i) {
                    size_t j = i + rng.below(order.size() - i);
                    std::swap(order[i], order[j]);
                }
                order.resize(pool.select_k);
                std::sort(order.begin(), order.end());
                action.picks.push_back(std::move(order));
            }
            return action;
        },
        {});
}

namespace {

RewardSummary reward_over_pairs(const World& world, const PoolSet& pools,
                                const std::vector<PairSample>& pairs, double lambda,
                                const std::function<ActionSet(const PairSample&)>& act) {
    if (pairs.empty()) throw ProtocolError("reward evaluation needs at least one pair");
    RewardSummary summary;
    summary.n_pairs = static_cast<int>(pairs.size());
    for (const auto& pair : pairs) {
        ActionSet action = act(pair);
        double fused = fuse_scores(modality_scores(world, pools, pair, action));
        double bce = binary_cross_entropy(fused, pair.label);
        double cost = normalized_cost(action, pools);
        summary.mean_reward += 1.0 - bce - lambda * cost;
        summary.mean_bce += bce;
        summary.mean_cost_norm += cost;
        summary.avg_gflops += total_gflops(action, pools);
    }
    summary.mean_reward /= summary.n_pairs;
    summary.mean_bce /= summary.n_pairs;
    summary.mean_cost_norm /= summary.n_pairs;
    summary.avg_gflops /= summary.n_pairs;
    return summary;
}

} // namespace

RewardSummary greedy_reward(const World& world, const PoolSet& pools, const AgentParams& params,
                            const std::vector<PairSample>& pairs, double lambda) {
    check_params_match_pools(params, pools);
    return reward_over_pairs(world, pools, pairs, lambda, [&](const PairSample& pair) {
        return greedy_for_probe(*pair.probe, pools, params);
    });
}

RewardSummary fixed_combo_reward(const World& world, const PoolSet& pools,
                                 const std::vector<std::vector<int>>& picks,
                                 const std::vector<PairSample>& pairs, double lambda) {
    ActionSet action = ActionSet::fixed(picks);
    validate_action(action, pools);
    return reward_over_pairs(world, pools, pairs, lambda,
                             [&](const PairSample&) { return action; });
}

namespace {

void k_subsets(int n, int k, std::vector<std::vector<int>>& out) {
    std::vector<int> cur(k);
    std::iota(cur.begin(), cur.end(), 0);
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
}

// All valid combos in odometer order (first pool fastest).
std::vector<std::vector<std::vector<int>>> enumerate_combos(const PoolSet& pools, int combo_cap) {
    auto pool_errors = validate_poolset(pools);
    if (!pool_errors.empty()) throw ConfigError("pool set invalid: " + pool_errors.front());

    std::vector<std::vector<std::vector<int>>> subsets(pools.pools.size());
    long long count = 1;
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        k_subsets(static_cast<int>(pools.pools[m].models.size()), pools.pools[m].select_k,
                  subsets[m]);
        count *= static_cast<long long>(subsets[m].size());
        if (count > combo_cap)
            throw ConfigError("combo count exceeds cap " + std::to_string(combo_cap));
    }

    std::vector<std::vector<std::vector<int>>> combos;
    std::vector<size_t> odometer(pools.pools.size(), 0);
    while (true) {
        std::vector<std::vector<int>> picks(pools.pools.size());
        for (size_t m = 0; m < pools.pools.size(); ++m) picks[m] = subsets[m][odometer[m]];
        combos.push_back(std::move(picks));
        size_t m = 0;
        for (; m < odometer.size(); ++m) {
            if (++odometer[m] < subsets[m].size()) break;
            odometer[m] = 0;
        }
        if (m == odometer.size()) break;
    }
    return combos;
}

} // namespace

OracleReport brute_force_oracle(const World& world, const PoolSet& pools,
                                const std::vector<PairSample>& pairs, double lambda,
                                int combo_cap) {
    if (pairs.empty()) throw ProtocolError("oracle needs at least one pair");
    auto combos = enumerate_combos(pools, combo_cap);

    // per-model score tables, shared across combos
    std::vector<size_t> pool_model_base(pools.pools.size());
    std::vector<const ModelSpec*> models;
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        pool_model_base[m] = models.size();
        for (const auto& model : pools.pools[m].models) models.push_back(&model);
    }
    std::vector<Vec> sim(models.size(), Vec(pairs.size()));
    parallel_for(models.size(), [&](size_t mi) {
        for (size_t pi = 0; pi < pairs.size(); ++pi)
            sim[mi][pi] = similarity_oracle(world, *models[mi], pairs[pi]);
    });

    OracleReport report;
    report.combos_evaluated = static_cast<int>(combos.size());
    Vec best_pair_reward(pairs.size(), -std::numeric_limits<double>::infinity());
    Vec best_pair_gflops(pairs.size(), 0.0);
    std::vector<size_t> best_pair_combo(pairs.size(), 0);
    double best_mean = -std::numeric_limits<double>::infinity();

    for (size_t ci = 0; ci < combos.size(); ++ci) {
        const auto& picks = combos[ci];
        ActionSet action = ActionSet::fixed(picks);
        double cost = normalized_cost(action, pools);
        double gflops = total_gflops(action, pools);
        std::string key = combo_key(pools, picks);

        double mean_reward = 0.0;
        for (size_t pi = 0; pi < pairs.size(); ++pi) {
            double fused = 0.0;
            for (size_t m = 0; m < pools.pools.size(); ++m) {
                double msum = 0.0;
                for (int pick : picks[m]) msum += sim[pool_model_base[m] + pick][pi];
                fused += msum / static_cast<double>(picks[m].size());
            }
            fused /= static_cast<double>(pools.pools.size());
            double r = reward(fused, pairs[pi].label, lambda, cost);
            mean_reward += r;
            if (r > best_pair_reward[pi]) {
                best_pair_reward[pi] = r;
                best_pair_gflops[pi] = gflops;
                best_pair_combo[pi] = ci;
            }
        }
        mean_reward /= static_cast<double>(pairs.size());

        bool better = mean_reward > best_mean ||
                      (mean_reward == best_mean && gflops < report.best_fixed_gflops) ||
                      (mean_reward == best_mean && gflops == report.best_fixed_gflops &&
                       key < report.best_fixed_key);
        if (better) {
            best_mean = mean_reward;
            report.best_fixed_mean_reward = mean_reward;
            report.best_fixed_gflops = gflops;
            report.best_fixed_picks = picks;
            report.best_fixed_key = key;
        }
    }

    for (size_t pi = 0; pi < pairs.size(); ++pi) {
        report.oracle_mean_reward += best_pair_reward[pi];
        report.oracle_avg_gflops += best_pair_gflops[pi];
        report.best_pair_picks.push_back(combos[best_pair_combo[pi]]);
    }
    report.oracle_mean_reward /= static_cast<double>(pairs.size());
    report.oracle_avg_gflops /= static_cast<double>(pairs.size());
    return report;
}

std::vector<ParetoRow> pareto_sweep(const World& world, const PoolSet& pools, int combo_cap) {
    auto combos = enumerate_combos(pools, combo_cap);
    auto gallery = gallery_split(world);
    auto probes = probe_split(world);
    if (probes.empty()) throw ProtocolError("world has no probe samples");

    std::vector<size_t> pool_model_base(pools.pools.size());
    std::vector<const ModelSpec*> models;
    for (size_t m = 0; m < pools.pools.size(); ++m) {
        pool_model_base[m] = models.size();
        for (const auto& model : pools.pools[m].models) models.push_back(&model);
    }
    std::vector<std::vector<Vec>> sim(models.size(),
                                      std::vector<Vec>(probes.size(), Vec(gallery.size())));
    parallel_for(models.size(), [&](size_t mi) {
        for (size_t pi = 0; pi < probes.size(); ++pi)
            for (size_t gi = 0; gi < gallery.size(); ++gi) {
                PairSample pair;
                pair.probe = probes[pi];
                pair.gallery = gallery[gi];
                pair.label = probes[pi]->identity == gallery[gi]->identity ? 1 : 0;
                sim[mi][pi][gi] = similarity_oracle(world, *models[mi], pair);
            }
    });

    ScoreMatrix matrix;
    for (const auto* g : gallery) matrix.gallery_identities.push_back(g->identity);
    for (const auto* p : probes) matrix.probe_identities.push_back(p->identity);
    matrix.scores.assign(probes.size(), Vec(gallery.size()));

    std::vector<ParetoRow> rows;
    for (const auto& picks : combos) {
        for (size_t pi = 0; pi < probes.size(); ++pi)
            for (size_t gi = 0; gi < gallery.size(); ++gi) {
                double fused = 0.0;
                for (size_t m = 0; m < pools.pools.size(); ++m) {
                    double msum = 0.0;
                    for (int pick : picks[m]) msum += sim[pool_model_base[m] + pick][pi][gi];
                    fused += msum / static_cast<double>(picks[m].size());
                }
                matrix.scores[pi][gi] = fused / static_cast<double>(pools.pools.size());
            }
        ParetoRow row;
        row.key = combo_key(pools, picks);
        row.picks = picks;
        row.gflops = total_gflops(ActionSet::fixed(picks), pools);
        row.rank1 = rank1(matrix);
        row.mean_ap = mean_average_precision(matrix);
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const ParetoRow& a, const ParetoRow& b) {
        if (a.gflops != b.gflops) return a.gflops < b.gflops;
        return a.key < b.key;
    });
    return rows;
}

std::string pareto_to_csv(const std::vector<ParetoRow>& rows) {
    std::string out = "combo,gflops,rank1,map\n";
    char buf[64];
    for (const auto& row : rows) {
        out += row.key;
        std::snprintf(buf, sizeof(buf), ",%.17g", row.gflops);
        out += buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", row.rank1);
        out += buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", row.mean_ap);
        out += buf;
        out += '\n';
    }
    return out;
}

std::vector<AblationRow> modality_ablation(const World& world, const PoolSet& pools,
                                           const AgentParams& params,
                                           const std::vector<std::vector<std::string>>& subsets) {
    std::vector<AblationRow> rows;
    for (const auto& subset : subsets) {
        if (subset.empty()) throw ConfigError("modality_ablation: empty subset");
        AblationRow row;
        row.subset = subset;
        row.report = evaluate_policy(world, pools, params, subset);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

nlohmann::json report_json(const EvalReport& report) {
    nlohmann::json histogram = nlohmann::json::array();
    for (const auto& cc : report.histogram)
        histogram.push_back({{"combo", cc.key},
                             {"picks", cc.picks},
                             {"count", cc.count},
                             {"gflops", cc.gflops}});
    nlohmann::json modality_cost = nlohmann::json::array();
    for (const auto& mc : report.modality_cost)
        modality_cost.push_back({{"modality", mc.modality}, {"avg_gflops", mc.avg_gflops}});
    return nlohmann::json{
        {"n_probes", report.n_probes},
        {"n_gallery", report.n_gallery},
        {"rank1", report.rank1},
        {"mean_ap", report.mean_ap},
        {"avg_gflops", report.avg_gflops},
        {"avg_cost_norm", report.avg_cost_norm},
        {"oracle_calls", report.oracle_calls},
        {"histogram", std::move(histogram)},
        {"modality_cost", std::move(modality_cost)},
    };
}

EvalReport report_from_json(const nlohmann::json& doc) {
    EvalReport report;
    report.n_probes = doc.at("n_probes").get<int>();
    report.n_gallery = doc.at("n_gallery").get<int>();
    report.rank1 = doc.at("rank1").get<double>();
    report.mean_ap = doc.at("mean_ap").get<double>();
    report.avg_gflops = doc.at("avg_gflops").get<double>();
    report.avg_cost_norm = doc.at("avg_cost_norm").get<double>();
    report.oracle_calls = doc.at("oracle_calls").get<long long>();
    for (const auto& item : doc.at("histogram")) {
        ComboCount cc;
        cc.key = item.at("combo").get<std::string>();
        cc.picks = item.at("picks").get<std::vector<std::vector<int>>>();
        cc.count = item.at("count").get<int>();
        cc.gflops = item.at("gflops").get<double>();
        report.histogram.push_back(std::move(cc));
    }
    for (const auto& item : doc.at("modality_cost")) {
        ModalityCost mc;
        mc.modality = item.at("modality").get<std::string>();
        mc.avg_gflops = item.at("avg_gflops").get<double>();
        report.modality_cost.push_back(std::move(mc));
    }
    return report;
}

} // namespace

std::string eval_report_to_json(const EvalReport& report) { return report_json(report).dump(1); }

EvalReport eval_report_from_json(const std::string& text) {
    try {
        return report_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("eval report: ") + e.what());
    }
}

std::string histogram_to_csv(const EvalReport& report) {
    std::vector<const ComboCount*> rows;
    for (const auto& cc : report.histogram) rows.push_back(&cc);
    std::sort(rows.begin(), rows.end(), [](const ComboCount* a, const ComboCount* b) {
        if (a->count != b->count) return a->count > b->count;
        return a->key < b->key;
    });
    std::string out = "combo,count,frequency,gflops\n";
    char buf[64];
    for (const auto* cc : rows) {
        out += cc->key;
        out += ',';
        out += std::to_string(cc->count);
        std::snprintf(buf, sizeof(buf), ",%.17g",
                      static_cast<double>(cc->count) / report.n_probes);
        out += buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", cc->gflops);
        out += buf;
        out += '\n';
    }
    return out;
}

std::string oracle_report_to_json(const OracleReport& report) {
    nlohmann::json doc{
        {"combos_evaluated", report.combos_evaluated},
        {"best_fixed_combo", report.best_fixed_key},
        {"best_fixed_picks", report.best_fixed_picks},
        {"best_fixed_mean_reward", report.best_fixed_mean_reward},
        {"best_fixed_gflops", report.best_fixed_gflops},
        {"oracle_mean_reward", report.oracle_mean_reward},
        {"oracle_avg_gflops", report.oracle_avg_gflops},
    };
    return doc.dump(1);
}

std::string ablation_to_json(const std::vector<AblationRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows)
        arr.push_back({{"subset", row.subset}, {"report", report_json(row.report)}});
    return nlohmann::json{{"ablation", std::move(arr)}}.dump(1);
}

} // namespace idselect
