// Copyright 2026 The invlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// invlab: command-line front end for the experiment harness.
//
//   invlab gen-corpus --sentences 5000 --entities 50 --out data/corpus.jsonl
//   invlab run --config exp.cfg --set attacker.type=msp
//   invlab pr-curve --sweep out/mlc/sweep.csv --out out/pr.svg
//   invlab compare --report out/mlc/report.txt --report out/geia/report.txt

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "invlab/error.h"
#include "invlab/harness/compare.h"
#include "invlab/harness/config.h"
#include "invlab/harness/experiment.h"
#include "invlab/harness/plot.h"
#include "invlab/harness/report.h"
#include "invlab/harness/synthetic.h"

namespace {

using invlab::harness::ExperimentConfig;

// Options shared by every experiment subcommand: --config, --set and one
// flag per config key.
struct ExperimentArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> flags;
  bool quiet = false;

  void Attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Config file (dotted key = value)");
    cmd->add_option("--set", overrides, "Override, key=value (repeatable)");
    cmd->add_flag("-q,--quiet", quiet, "No progress output");
    for (const auto& key : invlab::harness::ConfigKeys()) {
      cmd->add_option("--" + key, flags[key], "Config key " + key);
    }
  }

  ExperimentConfig Resolve() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{}
                                             : invlab::harness::LoadConfig(config_path);
    for (const auto& [key, value] : flags) {
      if (!value.empty()) invlab::harness::SetConfigValue(c, key, value);
    }
    for (const auto& o : overrides) invlab::harness::ApplyOverride(c, o);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedding-inversion attack laboratory"};
  app.require_subcommand(1);

  // gen-corpus
  invlab::harness::SyntheticOptions gen;
  std::string gen_out, gen_stopwords;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Write a synthetic corpus");
  gen_cmd->add_option("--sentences", gen.sentences, "Number of records")->capture_default_str();
  gen_cmd->add_option("--entities", gen.entities, "Entity pool size")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Corpus path")->required();
  gen_cmd->add_option("--stopwords-out", gen_stopwords, "Also write the stop-word list");

  // Experiment stages.
  ExperimentArgs exp_args;
  std::map<std::string, CLI::App*> stages;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"prepare", "Load, tokenize and split the corpus"},
           {"embed", "Embed the corpus through the victim (cached)"},
           {"train", "Train the attacker"},
           {"invert", "Invert the test split"},
           {"evaluate", "Score the inversions"},
           {"sweep", "MLC threshold sweep on the test split"},
           {"run", "All stages"}}) {
    auto* cmd = app.add_subcommand(name, help);
    exp_args.Attach(cmd);
    stages[name] = cmd;
  }

  // pr-curve
  std::string sweep_csv, plot_out;
  auto* pr_cmd = app.add_subcommand("pr-curve", "Plot a threshold sweep");
  pr_cmd->add_option("--sweep", sweep_csv, "Sweep CSV")->required()->check(CLI::ExistingFile);
  pr_cmd->add_option("--out", plot_out, "SVG path")->required();

  // compare
  std::vector<std::string> report_paths;
  std::string compare_out = "comparison";
  auto* cmp_cmd = app.add_subcommand("compare", "Tabulate attacker reports");
  cmp_cmd->add_option("--report", report_paths, "report.txt (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  cmp_cmd->add_option("--out", compare_out, "Output stem (.csv and .txt)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  std::string stage = "invlab";
  try {
    if (*gen_cmd) {
      stage = "gen-corpus";
      invlab::harness::WriteSyntheticCorpus(gen, gen_out);
      if (!gen_stopwords.empty()) invlab::harness::WriteStopwordList(gen_stopwords);
      return 0;
    }
    if (*pr_cmd) {
      stage = "pr-curve";
      invlab::harness::EmitPrCurve(sweep_csv, plot_out);
      return 0;
    }
    if (*cmp_cmd) {
      stage = "compare";
      std::vector<invlab::MetricsReport> reports;
      for (const auto& p : report_paths) reports.push_back(invlab::harness::LoadReport(p));
      const auto table = invlab::harness::CompareAttackers(reports);
      invlab::harness::WriteComparison(table, compare_out);
      std::cout << table.text;
      return 0;
    }

    stage = "config";
    const ExperimentConfig config = exp_args.Resolve();
    invlab::harness::ExperimentOptions options;
    if (!exp_args.quiet) options.log = &std::cerr;
    invlab::harness::Experiment exp(config, options);
    if (*stages["prepare"]) {
      exp.Prepare();
    } else if (*stages["embed"]) {
      exp.Embed();
      std::cout << "victim_queries=" << exp.victim_queries() << "\n";
    } else if (*stages["train"]) {
      exp.Train();
    } else if (*stages["invert"]) {
      exp.Invert();
    } else if (*stages["evaluate"]) {
      std::cout << invlab::harness::SerializeReport(exp.Evaluate());
    } else if (*stages["sweep"]) {
      const auto sweep = exp.Sweep();
      std::cout << "best_threshold=" << sweep.best_threshold
                << "\nbest_f1=" << sweep.best_f1 << "\n";
    } else if (*stages["run"]) {
      std::cout << invlab::harness::SerializeReport(exp.Run());
    }
    return 0;
  } catch (const invlab::StageError& e) {
    std::cerr << "invlab: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "invlab: " << stage << ": " << e.what() << "\n";
  }
  return 1;
}
