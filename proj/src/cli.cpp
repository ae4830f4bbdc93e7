#include "idselect/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

#include "idselect/agent.hpp"
#include "idselect/errors.hpp"
#include "idselect/eval.hpp"
#include "idselect/log.hpp"
#include "idselect/pool.hpp"
#include "idselect/rng.hpp"
#include "idselect/simworld.hpp"
#include "idselect/training.hpp"

namespace idselect {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw ConfigError("write failed: " + path);
}

std::string file_hash(const std::string& path) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_file(path))));
    return buf;
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

// Collects files written under one run directory so the manifest can list
// every emitted artifact exactly once, in emission order.
struct RunDir {
    std::string dir;
    std::vector<std::string> outputs;

    void emit(const std::string& name, const std::string& content) {
        write_file((fs::path(dir) / name).string(), content);
        if (std::find(outputs.begin(), outputs.end(), name) == outputs.end())
            outputs.push_back(name);
    }

    void finish(const std::string& command, const std::string& config_path, uint64_t seed,
                const std::vector<std::pair<std::string, std::string>>& inputs) {
        outputs.push_back("manifest.json");
        nlohmann::json in = nlohmann::json::object();
        for (const auto& [name, path] : inputs) in[name] = path;
        nlohmann::json doc{
            {"tool_version", kToolVersion},
            {"command", command},
            {"config_path", config_path},
            {"config_hash", file_hash(config_path)},
            {"seed", seed},
            {"inputs", std::move(in)},
            {"outputs", outputs},
        };
        write_file((fs::path(dir) / "manifest.json").string(), doc.dump(1));
    }
};

void check_checkpoint_compatible(const AgentParams& params, const World& world,
                                 const PoolSet& pools) {
    check_params_match_pools(params, pools);
    if (params.dims.descriptor_dim != world.config.descriptor_dim)
        throw ConfigError("checkpoint descriptor_dim " +
                          std::to_string(params.dims.descriptor_dim) +
                          " does not match world descriptor_dim " +
                          std::to_string(world.config.descriptor_dim));
}

std::vector<std::vector<std::string>> default_ablation_subsets(const PoolSet& pools) {
    std::vector<std::string> full;
    for (const auto& pool : pools.pools) full.push_back(pool.modality);
    std::vector<std::vector<std::string>> subsets{full};
    if (full.size() < 2) return subsets;
    for (size_t skip = 0; skip < full.size(); ++skip) {
        std::vector<std::string> subset;
        for (size_t m = 0; m < full.size(); ++m)
            if (m != skip) subset.push_back(full[m]);
        subsets.push_back(std::move(subset));
    }
    return subsets;
}

} // namespace

ProtocolConfig protocol_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("protocol config: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("protocol config: top level must be an object");
    ProtocolConfig config;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "seed")
                config.seed = value.get<uint64_t>();
            else if (key == "lambda")
                config.lambda = value.get<double>();
            else if (key == "n_pairs")
                config.n_pairs = value.get<int>();
            else if (key == "positive_fraction")
                config.positive_fraction = value.get<double>();
            else if (key == "combo_cap")
                config.combo_cap = value.get<int>();
            else if (key == "ablation_subsets")
                config.ablation_subsets = value.get<std::vector<std::vector<std::string>>>();
            else
                throw ConfigError("protocol config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("protocol config: ") + e.what());
    }
    if (config.lambda < 0.0) throw ConfigError("protocol config: lambda must be >= 0");
    if (config.n_pairs <= 0) throw ConfigError("protocol config: n_pairs must be positive");
    if (config.positive_fraction <= 0.0 || config.positive_fraction >= 1.0)
        throw ConfigError("protocol config: positive_fraction must be in (0, 1)");
    if (config.combo_cap <= 0) throw ConfigError("protocol config: combo_cap must be positive");
    return config;
}

ProtocolConfig load_protocol(const std::string& path) {
    return protocol_from_json(read_file(path));
}

int cmd_gen_world(const GenWorldArgs& args) {
    return run_guarded([&] {
        WorldConfig config = load_world_config(args.config_path);
        World world = generate_world(args.seed, config);
        write_file(args.out_path, world_to_json(world));
        log::info("world: %d identities, %zu samples -> %s", config.identities,
                  world.samples.size(), args.out_path.c_str());
    });
}

int cmd_train(const TrainArgs& args) {
    return run_guarded([&] {
        World world = load_world(args.world_path);
        PoolSet pools = load_pools(args.pools_path);
        TrainConfig config = load_train_config(args.config_path);

        RunDir run{args.out_dir, {}};
        // Refresh the rolling artifacts every epoch: a numeric failure in
        // epoch k leaves epoch k-1 on disk.
        auto on_epoch = [&](int epoch, const TrainResult& partial) {
            run.emit("checkpoint.json", checkpoint_to_json(partial.params));
            run.emit("train_records.csv", records_to_csv(partial.records));
            if (config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0) {
                char name[40];
                std::snprintf(name, sizeof(name), "checkpoint_epoch_%04d.json", epoch + 1);
                run.emit(name, checkpoint_to_json(partial.params));
            }
        };
        TrainResult result = train(world, pools, config, on_epoch);
        log::info("train: %d epochs, final lambda %.6f", config.epochs, result.lambda);
        run.finish("train", args.config_path, config.seed,
                   {{"world", args.world_path}, {"pools", args.pools_path}});
    });
}

int cmd_eval(const EvalArgs& args) {
    return run_guarded([&] {
        World world = load_world(args.world_path);
        PoolSet pools = load_pools(args.pools_path);
        AgentParams params = load_checkpoint(args.checkpoint_path);
        ProtocolConfig protocol = load_protocol(args.config_path);
        check_checkpoint_compatible(params, world, pools);

        RunDir run{args.out_dir, {}};
        EvalReport report = evaluate_policy(world, pools, params);
        run.emit("eval_report.json", eval_report_to_json(report));
        run.emit("histogram.csv", histogram_to_csv(report));

        auto subsets = protocol.ablation_subsets.empty() ? default_ablation_subsets(pools)
                                                         : protocol.ablation_subsets;
        auto ablation = modality_ablation(world, pools, params, subsets);
        run.emit("ablation.json", ablation_to_json(ablation));

        log::info("eval: rank1 %.4f, mAP %.4f, avg gflops %.2f", report.rank1, report.mean_ap,
                  report.avg_gflops);
        run.finish("eval", args.config_path, protocol.seed,
                   {{"world", args.world_path},
                    {"pools", args.pools_path},
                    {"checkpoint", args.checkpoint_path}});
    });
}

int cmd_baselines(const BaselinesArgs& args) {
    return run_guarded([&] {
        World world = load_world(args.world_path);
        PoolSet pools = load_pools(args.pools_path);
        ProtocolConfig protocol = load_protocol(args.config_path);

        RunDir run{args.out_dir, {}};
        auto sweep = pareto_sweep(world, pools, protocol.combo_cap);
        run.emit("pareto.csv", pareto_to_csv(sweep));

        auto pairs = make_pairs(world, protocol.n_pairs, protocol.positive_fraction,
                                mix_seed(protocol.seed, fnv1a64("baseline-pairs")));
        OracleReport oracle =
            brute_force_oracle(world, pools, pairs, protocol.lambda, protocol.combo_cap);

        // Constant Min/Max summaries for every non-empty modality subset,
        // smallest subsets first. Metrics use the reduced pool set, so both
        // fusion and cost cover only the subset.
        size_t n_pools = pools.pools.size();
        if (n_pools > 10) throw ConfigError("modality subset enumeration capped at 10 pools");
        std::vector<unsigned> masks;
        for (unsigned mask = 1; mask < (1u << n_pools); ++mask) masks.push_back(mask);
        std::sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
            int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
            if (pa != pb) return pa < pb;
            return a < b;
        });

        auto combo_summary = [&](const World& w, const PoolSet& sub,
                                 const std::vector<std::vector<int>>& picks) {
            EvalReport r = evaluate_fixed_combo(w, sub, picks);
            return nlohmann::json{{"combo", r.histogram.front().key},
                                  {"gflops", r.avg_gflops},
                                  {"rank1", r.rank1},
                                  {"mean_ap", r.mean_ap}};
        };

        nlohmann::json subsets = nlohmann::json::array();
        for (unsigned mask : masks) {
            std::vector<std::string> names;
            for (size_t m = 0; m < n_pools; ++m)
                if (mask & (1u << m)) names.push_back(pools.pools[m].modality);
            PoolSet sub = subset_pools(pools, names);
            subsets.push_back({{"modalities", names},
                               {"min", combo_summary(world, sub, cheapest_picks(sub))},
                               {"max", combo_summary(world, sub, most_expensive_picks(sub))}});
        }

        nlohmann::json doc{
            {"subsets", std::move(subsets)},
            {"best_fixed", nlohmann::json::parse(oracle_report_to_json(oracle))},
        };
        run.emit("baselines.json", doc.dump(1));

        log::info("baselines: %d combos, best fixed %s", oracle.combos_evaluated,
                  oracle.best_fixed_key.c_str());
        run.finish("baselines", args.config_path, protocol.seed,
                   {{"world", args.world_path}, {"pools", args.pools_path}});
    });
}

} // namespace idselect
