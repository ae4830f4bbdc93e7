#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace idselect {

inline constexpr const char* kToolVersion = "0.1.0";

// Evaluation and baseline protocol settings shared by the eval and
// baselines commands. All fields are optional in JSON; unknown keys are
// rejected.
struct ProtocolConfig {
    uint64_t seed = 1;              // verification-pair sampling
    double lambda = 0.1;            // reward trade-off for the oracle
    int n_pairs = 512;              // verification pairs for reward baselines
    double positive_fraction = 0.5; // same-identity share of sampled pairs
    int combo_cap = 10000;          // enumeration guard
    // Modality subsets for policy ablation; empty means the full set plus
    // every leave-one-out subset.
    std::vector<std::vector<std::string>> ablation_subsets;
};

ProtocolConfig protocol_from_json(const std::string& text);
ProtocolConfig load_protocol(const std::string& path);

struct GenWorldArgs {
    std::string config_path;
    uint64_t seed = 1;
    std::string out_path;
};

struct TrainArgs {
    std::string config_path;
    std::string world_path;
    std::string pools_path;
    std::string out_dir;
};

struct EvalArgs {
    std::string config_path;
    std::string world_path;
    std::string pools_path;
    std::string checkpoint_path;
    std::string out_dir;
};

struct BaselinesArgs {
    std::string config_path;
    std::string world_path;
    std::string pools_path;
    std::string out_dir;
};

// Exit codes: 0 success, 2 input or validation error, 3 numeric error.
// Every command is deterministic: identical inputs produce byte-identical
// outputs, and input files are never written to.
//
// gen-world: world snapshot at out_path.
// train: checkpoint.json and train_records.csv refreshed after every epoch
//   (so a mid-run numeric failure leaves the last completed epoch on disk),
//   periodic checkpoint_epoch_NNNN.json when the config asks for them, and
//   manifest.json on success.
// eval: eval_report.json, histogram.csv, ablation.json, manifest.json.
// baselines: pareto.csv, baselines.json (per-subset Min/Max summaries and
//   the brute-force best constant combo), manifest.json.
int cmd_gen_world(const GenWorldArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_baselines(const BaselinesArgs& args);

} // namespace idselect
