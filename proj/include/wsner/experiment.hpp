// wsner/experiment.hpp
//
// Copyright 2026  The wsner authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABILITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef WSNER_EXPERIMENT_HPP_
#define WSNER_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wsner/core.hpp"
#include "wsner/model.hpp"
#include "wsner/train.hpp"

namespace wsner {

// Which training stages precede the strong finetune.
enum class BackboneVariant { none, indomain_weak, ood_indomain_weak };

const char* to_string(BackboneVariant v);
BackboneVariant backbone_from_string(const std::string& s);

// Sweep axes; cells are the cartesian product in listing order, except that
// the `none` variant (no weak stage) collapses the weak axis to a single
// entry recorded as weak_size 0.
struct ExperimentGrid {
  std::vector<BackboneVariant> variants;
  std::vector<long> weak_sizes;    // in-domain weak subset sizes (prefix)
  std::vector<long> strong_sizes;  // strong subset sizes; 0 = weak-only run
  std::vector<uint64_t> seeds;

  void validate() const;
};

// Shared inputs for every cell. ood_weak may be null when no cell uses the
// double-backbone variant. eval must carry gold labels.
struct ExperimentData {
  const Corpus* ood_weak = nullptr;
  const Corpus* indomain_weak = nullptr;
  const Corpus* strong_train = nullptr;
  const Corpus* eval = nullptr;
  ModelDims dims;
  TrainConfig config;
  AugmentOptions augment;
  // Epoch count for the strong finetune stage; the strong corpus is much
  // smaller than the weak ones, so it usually needs more passes than
  // config.epochs_per_phase. Disengaged keeps the config value.
  std::optional<int> strong_epochs;
};

struct CellResult {
  BackboneVariant variant = BackboneVariant::none;
  long weak_size = 0;
  long strong_size = 0;
  uint64_t seed = 0;
  double precision = 0.0;  // weighted, percent
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::pair<std::string, double>> per_type_f1;
};

// "variant|weak|strong|seed" — ledger key and cell name in errors.
std::string cell_key(BackboneVariant variant, long weak_size, long strong_size,
                     uint64_t seed);

// Trains and evaluates one cell (no ledger involved).
CellResult run_cell(const ExperimentData& data, BackboneVariant variant,
                    long weak_size, long strong_size, uint64_t seed);

struct ExperimentReport {
  std::vector<CellResult> rows;  // grid order
  std::vector<std::string> artifacts;  // files written under out_dir
};

using ProgressFn = std::function<void(const std::string& message)>;

// Runs every cell of the grid, resuming from out_dir/ledger.jsonl (completed
// cells are skipped and their stored rows reused), then writes results.csv,
// summary.csv and the two trend plots into out_dir.
ExperimentReport run_experiment(const ExperimentGrid& grid,
                                const ExperimentData& data,
                                const std::string& out_dir,
                                const ProgressFn& progress = {});

// Artifact texts (pure functions of rows; plots are rendered from the
// CSV-rounded values so regenerating from results.csv is byte-identical).
std::string results_csv(const std::vector<CellResult>& rows);
std::vector<CellResult> parse_results_csv(const std::string& text);
std::string summary_csv(const std::vector<CellResult>& rows);
std::string f1_vs_strong_svg(const std::vector<CellResult>& rows);
std::string f1_vs_weak_svg(const std::vector<CellResult>& rows);

// File form of a full experiment description (grid, corpus paths, model
// dims, train config, augmentation) for the CLI.
struct ExperimentSpecFile {
  ExperimentGrid grid;
  std::string ood_weak_path;
  std::string indomain_weak_path;
  std::string strong_path;
  std::string eval_path;
  std::vector<std::string> scheme_types;      // in-domain scheme
  std::vector<std::string> ood_scheme_types;  // defaults to scheme_types
  ModelDims dims;
  TrainConfig config;
  std::string gazetteers_path;  // optional; augmentation source
  double drop_rate = 0.1;
  double replace_prob = 0.5;
  std::optional<int> strong_epochs;
};

ExperimentSpecFile read_experiment_spec(const std::string& path);

}  // namespace wsner

#endif  // WSNER_EXPERIMENT_HPP_
