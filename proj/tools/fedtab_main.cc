// Copyright 2026 The Fedtab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "fedtab/pipeline.h"

namespace {

using Stage = std::function<absl::Status(const fedtab::PipelineConfig&)>;

int RunStage(const std::string& config_path, std::optional<uint64_t> seed,
             const Stage& stage) {
  absl::StatusOr<fedtab::PipelineConfig> config =
      fedtab::PipelineConfig::Load(config_path);
  if (!config.ok()) {
    std::cerr << "error: " << config.status().message() << "\n";
    return 2;
  }
  if (seed.has_value()) config->seed = *seed;
  std::error_code ec;
  std::filesystem::create_directories(config->output_dir, ec);
  if (absl::Status s = stage(*config); !s.ok()) {
    std::cerr << "error: " << s.message() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated tabular data augmentation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fedtab::kToolVersion));

  struct Command {
    const char* name;
    const char* help;
    Stage stage;
  };
  const Command commands[] = {
      {"partition", "split the dataset into a test set and client shards",
       fedtab::RunPartitionStage},
      {"fit", "run the federated statistics protocol and write stats.json",
       fedtab::RunFitStage},
      {"synthesize", "write one synthetic table per client",
       fedtab::RunSynthesizeStage},
      {"evaluate", "score similarity and train FedAvg raw vs augmented",
       fedtab::RunEvaluateStage},
      {"pipeline", "run all four stages", fedtab::RunPipeline},
  };

  std::string config_path;
  std::optional<uint64_t> seed;
  const Stage* selected = nullptr;
  for (const Command& command : commands) {
    CLI::App* sub = app.add_subcommand(command.name, command.help);
    sub->add_option("--config", config_path, "pipeline config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the run seed");
    sub->callback([&selected, &command] { selected = &command.stage; });
  }
  CLI11_PARSE(app, argc, argv);
  return RunStage(config_path, seed, *selected);
}
