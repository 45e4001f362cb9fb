// Copyright 2026 The MRCQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// mrcq: train, evaluate, sweep and inspect from the command line.

#include <iostream>

#include <CLI11.hpp>

#include "mrcq/cli/commands.hpp"

namespace {

void add_common(CLI::App* cmd, mrcq::cli::Options& o) {
    cmd->add_option("--config", o.config, "experiment config (JSON); defaults apply to missing keys");
    cmd->add_option("--out", o.out, "output directory (overrides output.dir)");
    cmd->add_option("--seed", o.seed, "overrides model.seed and training.seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-resolution causal Q-Former experiments at desk scale"};
    app.require_subcommand(1);
    mrcq::cli::Options o;
    std::string kind, path;

    auto* train = app.add_subcommand("train", "train a model; writes checkpoint, log and resolved config");
    add_common(train, o);

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint; writes a JSONL report");
    add_common(eval, o);
    eval->add_option("--checkpoint", o.checkpoint, "checkpoint file")->required();
    eval->add_option("--dataset", o.dataset, "manifest file (test split); default: the checkpoint config's test set");
    eval->add_option("--mask-level", o.mask_level, "zero this resolution level's queries");

    auto* sweep = app.add_subcommand("sweep", "window or lambda sweep on the two-scale task");
    add_common(sweep, o);
    sweep->add_option("kind", kind, "window | lambda")->required();
    sweep->add_option("--grid", o.grid, "comma-separated grid, e.g. 1,2,5,10");

    auto* inspect = app.add_subcommand("inspect", "describe a checkpoint or feature file");
    inspect->add_option("path", path, "artifact path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return mrcq::cli::kUserError;
    }

    return mrcq::cli::run_guarded(
        [&] {
            if (*train) mrcq::cli::cmd_train(o, std::cout);
            if (*eval) mrcq::cli::cmd_eval(o, std::cout);
            if (*sweep) mrcq::cli::cmd_sweep(kind, o, std::cout);
            if (*inspect) mrcq::cli::cmd_inspect(path, std::cout);
        },
        std::cerr);
}
