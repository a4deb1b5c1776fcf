// wsner/train.hpp
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

#ifndef WSNER_TRAIN_HPP_
#define WSNER_TRAIN_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsner/core.hpp"
#include "wsner/metrics.hpp"
#include "wsner/model.hpp"
#include "wsner/weaklabel.hpp"

namespace wsner {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct TrainConfig {
  double q = 0.7;                // generalized cross entropy exponent, (0, 1]
  double tau = 0.7;              // noisy-label removal threshold, [0, 1]
  int K = 5;                     // ensemble size, >= 1
  int epochs_per_phase = 3;      // >= 0
  double learning_rate = 0.01;   // > 0
  int batch_size = 16;           // >= 1
  int self_train_rounds = 1;     // >= 0
  double gamma = 0.9;            // self-train confidence threshold, [0, 1]
  uint64_t seed = 0;

  void validate() const;
};

// JSON object with exactly the TrainConfig field names; missing keys keep
// defaults, unknown keys are rejected.
TrainConfig read_train_config(const std::string& path);
TrainConfig parse_train_config(const std::string& text, const std::string& where);

// Binary per-token inclusion weights, aligned with the labeled tokens.
using SampleWeights = std::vector<std::vector<uint8_t>>;

// Which span slot a corpus trains from: strong -> gold, weak -> weak.
// Unlabeled corpora cannot be trained on.
LabelSource training_source(const Corpus& corpus);

// BIO label rows for every sentence, from the given slot. Errors name the
// first sentence missing that slot.
std::vector<std::vector<int>> corpus_labels(const Corpus& corpus,
                                            LabelSource source);

// ---------------------------------------------------------------------------
// Losses and weights
// ---------------------------------------------------------------------------

// Per-token generalized cross entropy term (1 - f^q) / q for the probability
// f assigned to the observed label. q -> 0 recovers cross entropy; q = 1 is
// the mean-absolute-error-style flat loss.
double gce_term(double f, double q);

// Sum over all tokens of w_i * (1 - f_{i,y_i}^q) / q. Tokens with w_i = 0
// contribute zero loss (and zero gradient in the training loops).
double gce_loss(const PredictionBatch& preds,
                const std::vector<std::vector<int>>& labels,
                const SampleWeights& weights, double q);

// w_i = 1 iff the (frozen) predicted probability of the observed label is at
// least tau. tau = 0 disables removal: every weight is 1.
SampleWeights compute_label_weights(const PredictionBatch& preds,
                                    const std::vector<std::vector<int>>& labels,
                                    double tau);

// Adam optimizer over a flat parameter vector.
struct Adam {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Eigen::VectorXd m, v;
  long steps = 0;

  Adam(long n, double lr_in);
  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad);
};

// Per-epoch training diagnostics (mean loss per token; kept = tokens with
// weight 1 under the removal rule that epoch).
struct TrainLog {
  std::vector<double> epoch_losses;
  std::vector<long> kept_tokens;
  std::vector<long> total_tokens;
};

// ---------------------------------------------------------------------------
// Training stack
// ---------------------------------------------------------------------------

// Mini-batch training of the generalized cross entropy loss with per-epoch
// noisy-label removal: epoch 0 keeps every token; later epochs recompute
// weights from the current model before updating. Deterministic given
// config.seed.
TaggerParams train_noise_robust(const TaggerParams& init, const Corpus& corpus,
                                LabelSource source, const TrainConfig& config,
                                TrainLog* log = nullptr);
TaggerParams train_noise_robust(const TaggerParams& init, const Corpus& corpus,
                                const TrainConfig& config,
                                TrainLog* log = nullptr);

struct EnsembleResult {
  std::vector<TaggerParams> members;
  TaggerParams student;
};

// K members trained from the same init with seeds config.seed+1 ...
// config.seed+K; the teacher distribution per token is the arithmetic mean of
// the member probability rows; the student starts from init and minimizes
// mean KL(teacher || student) over all tokens.
EnsembleResult train_ensemble(const TaggerParams& init, const Corpus& corpus,
                              LabelSource source, const TrainConfig& config,
                              TrainLog* log = nullptr);
EnsembleResult train_ensemble(const TaggerParams& init, const Corpus& corpus,
                              const TrainConfig& config,
                              TrainLog* log = nullptr);

// t_j = p_j^2 / sum_k p_k^2. Input must sum to 1 within 1e-6.
Eigen::VectorXd sharpen(const Eigen::VectorXd& p);

// ---------------------------------------------------------------------------
// Augmentation and self-training
// ---------------------------------------------------------------------------

struct AugmentOptions {
  Gazetteers gazetteers;      // same-type substitution source; empty disables
  double drop_rate = 0.1;     // per outside-token drop probability
  double replace_prob = 0.5;  // per-entity substitution probability
};

struct AugmentedSentence {
  Sentence sentence;
  // Per output token: index of the originating input token, or -1 for tokens
  // introduced by entity substitution.
  std::vector<int> src_index;
};

// Label-preserving augmentation: each labeled entity is replaced, with
// replace_prob, by a uniformly chosen same-type gazetteer phrase (spans are
// re-extended to the new length); each outside token is dropped with
// drop_rate. Operates on weak spans when present, else gold spans; the other
// slot is cleared (token drops would misalign it). If every token would be
// dropped the sentence is returned unchanged.
AugmentedSentence augment_sentence(const Sentence& sentence,
                                   const Gazetteers& gazetteers,
                                   double drop_rate, uint64_t seed,
                                   double replace_prob = 0.5);

// Iterated self-training on the corpus tokens (labels ignored): per round,
// snapshot predictions, select tokens whose max probability reaches
// config.gamma, fix sharpened rows as targets, then train on the original and
// one augmented view of every sentence via KL for config.epochs_per_phase
// epochs. Rounds with zero selected tokens leave the parameters untouched.
TaggerParams self_train(const TaggerParams& params, const Corpus& corpus,
                        const TrainConfig& config,
                        const AugmentOptions& augment = {},
                        TrainLog* log = nullptr);

// ---------------------------------------------------------------------------
// Label-scheme mapping
// ---------------------------------------------------------------------------

struct LabelMapping {
  TagScheme target;
  // Source type -> target type. Types absent from the map are dropped
  // (their spans deleted, tokens reverting to O).
  std::map<std::string, std::string> type_map;
};

// Renames spans of mapped types and deletes the rest, in both span slots;
// the result carries the target scheme.
Corpus map_label_scheme(const Corpus& corpus, const LabelMapping& mapping);

// ---------------------------------------------------------------------------
// Staged continual training
// ---------------------------------------------------------------------------

enum class Phase { noise_robust, ensemble, self_train };

const char* to_string(Phase p);
Phase phase_from_string(const std::string& s);

struct Stage {
  std::string name;
  const Corpus* corpus = nullptr;
  Quality quality = Quality::weak;  // strong stages train on gold spans
  std::vector<Phase> phases;
  TagScheme scheme;                 // head scheme; must match the corpus
  std::optional<int> epochs;        // overrides config.epochs_per_phase
};

struct StagePlan {
  std::vector<Stage> stages;
  void validate() const;
};

struct StageEval {
  std::string stage;
  std::string corpus;
  PRFReport report;
};

struct PipelineResult {
  TaggerParams params;
  std::vector<StageEval> evals;
};

struct PipelineOptions {
  // Gold-labeled held-out corpus; evaluated after every stage whose scheme
  // matches. Null disables evaluation.
  const Corpus* eval_corpus = nullptr;
  AugmentOptions augment;
};

// Runs the staged pipeline: weak stages may use the full phase stack
// (noise-robust training, ensemble distillation, self-training); a change of
// scheme between stages reinitializes the classification head while carrying
// the encoder; strong stages are restricted to the noise_robust phase and run
// with tau = 0 (no removal) on the existing head.
PipelineResult run_controster(const StagePlan& plan, const TrainConfig& config,
                              TaggerParams init,
                              const PipelineOptions& options = {});

// CSV of the per-stage evaluation log: one row per (stage, entity type) plus
// weighted-average and micro rows per stage.
std::string stage_eval_csv(const std::vector<StageEval>& evals);

// File form of a stage plan: corpora referenced by path, resolved by the
// caller (quality strings "weak"/"strong"; phases by name; optional scheme
// as a type list, else the corpus scheme; optional epochs override).
struct StageFileSpec {
  std::string name;
  std::string corpus_path;
  Quality quality = Quality::weak;
  std::vector<Phase> phases;
  std::vector<std::string> scheme_types;
  std::optional<int> epochs;
};

struct StagePlanFile {
  std::vector<StageFileSpec> stages;
};

StagePlanFile read_stage_plan(const std::string& path);

}  // namespace wsner

#endif  // WSNER_TRAIN_HPP_
