// Command-line front end: gen-world, train, eval, baselines.
// Exit codes: 0 success, 2 input or validation error, 3 numeric error.

#include <string>

#include "CLI11.hpp"

#include "idselect/cli.hpp"
#include "idselect/eval.hpp"

int main(int argc, char** argv) {
    CLI::App app{"budget-constrained model selection over modality pools"};
    app.require_subcommand(1);
    app.set_version_flag("--version", idselect::kToolVersion);

    int threads = 1;
    app.add_option("--threads", threads, "evaluation worker threads")->capture_default_str();

    idselect::GenWorldArgs gen;
    auto* cmd_gen = app.add_subcommand("gen-world", "generate a synthetic world snapshot");
    cmd_gen->add_option("--config", gen.config_path, "world config JSON")->required();
    cmd_gen->add_option("--seed", gen.seed, "generation seed")->capture_default_str();
    cmd_gen->add_option("--out", gen.out_path, "output snapshot path")->required();

    idselect::TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "train a selection policy");
    cmd_train->add_option("--config", train.config_path, "training config JSON")->required();
    cmd_train->add_option("--world", train.world_path, "world snapshot")->required();
    cmd_train->add_option("--pools", train.pools_path, "model pools JSON")->required();
    cmd_train->add_option("--out", train.out_dir, "run output directory")->required();

    idselect::EvalArgs eval;
    auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on the identification protocol");
    cmd_eval->add_option("--config", eval.config_path, "protocol config JSON")->required();
    cmd_eval->add_option("--world", eval.world_path, "world snapshot")->required();
    cmd_eval->add_option("--pools", eval.pools_path, "model pools JSON")->required();
    cmd_eval->add_option("--checkpoint", eval.checkpoint_path, "policy checkpoint")->required();
    cmd_eval->add_option("--out", eval.out_dir, "report output directory")->required();

    idselect::BaselinesArgs baselines;
    auto* cmd_base = app.add_subcommand("baselines", "constant-combo baselines and Pareto sweep");
    cmd_base->add_option("--config", baselines.config_path, "protocol config JSON")->required();
    cmd_base->add_option("--world", baselines.world_path, "world snapshot")->required();
    cmd_base->add_option("--pools", baselines.pools_path, "model pools JSON")->required();
    cmd_base->add_option("--out", baselines.out_dir, "report output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    idselect::set_eval_threads(threads);
    if (cmd_gen->parsed()) return idselect::cmd_gen_world(gen);
    if (cmd_train->parsed()) return idselect::cmd_train(train);
    if (cmd_eval->parsed()) return idselect::cmd_eval(eval);
    return idselect::cmd_baselines(baselines);
}
