#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idselect/agent.hpp"
#include "idselect/pool.hpp"
#include "idselect/simworld.hpp"

namespace idselect {

// Closed-set identification scores: one row per probe, one column per
// gallery entry. Entries must be finite; every probe identity must appear
// in the gallery.
struct ScoreMatrix {
    std::vector<int> probe_identities;
    std::vector<int> gallery_identities;
    std::vector<Vec> scores; // [probe][gallery]
};

// Fraction of probes whose highest-scoring gallery column carries the probe
// identity. Score ties resolve to the lowest column index.
double rank1(const ScoreMatrix& matrix);

// Interpolation-free mAP: per probe, AP = mean over relevant gallery items
// of precision at that item's rank (descending score, ties to the lowest
// column index); mAP = mean over probes.
double mean_average_precision(const ScoreMatrix& matrix);

// One selection combo aggregated over probes. Picks are stored sorted per
// modality; the key is "modality:i[+j]" segments joined with '|'.
struct ComboCount {
    std::string key;
    std::vector<std::vector<int>> picks;
    int count = 0;
    double gflops = 0.0; // per evaluation of this combo
};

struct ModalityCost {
    std::string modality;
    double avg_gflops = 0.0; // mean selected cost per probe in this modality
};

struct EvalReport {
    int n_probes = 0;
    int n_gallery = 0;
    double rank1 = 0.0;
    double mean_ap = 0.0;
    double avg_gflops = 0.0;    // mean selected compute per probe
    double avg_cost_norm = 0.0; // mean normalized cost per probe
    long long oracle_calls = 0; // similarity evaluations actually made
    std::vector<ComboCount> histogram;       // sorted by key
    std::vector<ModalityCost> modality_cost; // pool order
};

std::string eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const std::string& text);

// "combo,count,frequency,gflops" rows, count-descending then key-ascending.
std::string histogram_to_csv(const EvalReport& report);

// Enrollment split: the first sample of each identity (lowest sample id) is
// the gallery, every other sample is a probe.
std::vector<const SequenceSample*> gallery_split(const World& world);
std::vector<const SequenceSample*> probe_split(const World& world);

// Worker count for the per-probe and per-model evaluation loops. Results
// are reduced in a fixed order, so every thread count produces identical
// bytes. Values below 1 are treated as 1.
void set_eval_threads(int n);
int eval_threads();

// Greedy policy evaluation over the identification protocol. Selection
// always runs over all pools; when active_modalities is non-empty, only
// those modality scores enter the fusion (cost is still charged for
// everything selected). An empty list means all modalities. Per probe and
// gallery entry, exactly the selected models are queried, the same model on
// both sides of each pair.
EvalReport evaluate_policy(const World& world, const PoolSet& pools, const AgentParams& params,
                           const std::vector<std::string>& active_modalities = {});

// The same combo for every probe; the histogram is one-hot.
EvalReport evaluate_fixed_combo(const World& world, const PoolSet& pools,
                                const std::vector<std::vector<int>>& picks);

// Uniformly random valid combo per probe, deterministic in seed.
EvalReport evaluate_random(const World& world, const PoolSet& pools, uint64_t seed);

// Reward of a policy or combo over a verification pair set (the training
// objective without the entropy term).
struct RewardSummary {
    int n_pairs = 0;
    double mean_reward = 0.0;
    double mean_bce = 0.0;
    double mean_cost_norm = 0.0;
    double avg_gflops = 0.0;
};

RewardSummary greedy_reward(const World& world, const PoolSet& pools, const AgentParams& params,
                            const std::vector<PairSample>& pairs, double lambda);
RewardSummary fixed_combo_reward(const World& world, const PoolSet& pools,
                                 const std::vector<std::vector<int>>& picks,
                                 const std::vector<PairSample>& pairs, double lambda);

// Exhaustive enumeration of every valid combo against a pair set, scored by
// the reward at the given lambda. Yields the best constant combo and the
// per-pair upper bound (the reward-maximizing combo chosen per pair).
// Exceeding combo_cap is a ConfigError.
struct OracleReport {
    int combos_evaluated = 0;
    std::string best_fixed_key;
    std::vector<std::vector<int>> best_fixed_picks;
    double best_fixed_mean_reward = 0.0;
    double best_fixed_gflops = 0.0;
    double oracle_mean_reward = 0.0; // mean over pairs of the per-pair max
    double oracle_avg_gflops = 0.0;  // mean cost of the per-pair argmax combos
    // per-pair reward-maximizing combo (first enumerated wins exact ties)
    std::vector<std::vector<std::vector<int>>> best_pair_picks;
};

OracleReport brute_force_oracle(const World& world, const PoolSet& pools,
                                const std::vector<PairSample>& pairs, double lambda,
                                int combo_cap = 10000);

std::string oracle_report_to_json(const OracleReport& report);

// Identification metrics for every valid combo (the Pareto sweep), sorted
// by gflops ascending then key. Same combo cap contract as the oracle.
struct ParetoRow {
    std::string key;
    std::vector<std::vector<int>> picks;
    double gflops = 0.0;
    double rank1 = 0.0;
    double mean_ap = 0.0;
};

std::vector<ParetoRow> pareto_sweep(const World& world, const PoolSet& pools,
                                    int combo_cap = 10000);

// "combo,gflops,rank1,map" rows in sweep order.
std::string pareto_to_csv(const std::vector<ParetoRow>& rows);

// evaluate_policy restricted to each modality subset (fusion averages only
// over the subset's modalities). Subsets must be non-empty.
struct AblationRow {
    std::vector<std::string> subset;
    EvalReport report;
};

std::vector<AblationRow> modality_ablation(const World& world, const PoolSet& pools,
                                           const AgentParams& params,
                                           const std::vector<std::vector<std::string>>& subsets);

std::string ablation_to_json(const std::vector<AblationRow>& rows);

} // namespace idselect
