// src/train.cpp
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

#include "wsner/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

namespace wsner {

namespace {

using nlohmann::json;

std::string read_file_text(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(std::string(what) + ": cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(where + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(q > 0.0) || q > 1.0) throw Error("train config: q must be in (0, 1]");
  if (tau < 0.0 || tau > 1.0)
    throw Error("train config: tau must be in [0, 1]");
  if (K < 1) throw Error("train config: K must be >= 1");
  if (epochs_per_phase < 0)
    throw Error("train config: epochs_per_phase must be >= 0");
  if (!(learning_rate > 0.0))
    throw Error("train config: learning_rate must be > 0");
  if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
  if (self_train_rounds < 0)
    throw Error("train config: self_train_rounds must be >= 0");
  if (gamma < 0.0 || gamma > 1.0)
    throw Error("train config: gamma must be in [0, 1]");
}

TrainConfig parse_train_config(const std::string& text,
                               const std::string& where) {
  json j = parse_json(text, where);
  if (!j.is_object()) throw Error(where + ": expected a JSON object");
  TrainConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "q") cfg.q = value.get<double>();
      else if (key == "tau") cfg.tau = value.get<double>();
      else if (key == "K") cfg.K = value.get<int>();
      else if (key == "epochs_per_phase") cfg.epochs_per_phase = value.get<int>();
      else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
      else if (key == "batch_size") cfg.batch_size = value.get<int>();
      else if (key == "self_train_rounds")
        cfg.self_train_rounds = value.get<int>();
      else if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<uint64_t>();
      else throw Error(where + ": unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(where + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

TrainConfig read_train_config(const std::string& path) {
  return parse_train_config(read_file_text(path, "train config"),
                            "train config " + path);
}

LabelSource training_source(const Corpus& corpus) {
  switch (corpus.quality) {
    case Quality::strong: return LabelSource::gold;
    case Quality::weak: return LabelSource::weak;
    default:
      throw Error("training requires a labeled corpus (quality is unlabeled)");
  }
}

std::vector<std::vector<int>> corpus_labels(const Corpus& corpus,
                                            LabelSource source) {
  std::vector<std::vector<int>> labels;
  labels.reserve(corpus.sentences.size());
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    const Sentence& s = corpus.sentences[i];
    const auto* spans = spans_of(s, source);
    if (spans == nullptr)
      throw Error("sentence " + std::to_string(i) + " lacks " +
                  std::string(to_string(source)) + " labels");
    labels.push_back(encode_bio(*spans, s.length(), corpus.scheme));
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Losses and weights
// ---------------------------------------------------------------------------

double gce_term(double f, double q) {
  if (!(q > 0.0) || q > 1.0) throw Error("gce: q must be in (0, 1]");
  return (1.0 - std::pow(f, q)) / q;
}

double gce_loss(const PredictionBatch& preds,
                const std::vector<std::vector<int>>& labels,
                const SampleWeights& weights, double q) {
  if (!(q > 0.0) || q > 1.0) throw Error("gce_loss: q must be in (0, 1]");
  if (preds.probs.size() != labels.size() ||
      preds.probs.size() != weights.size())
    throw Error("gce_loss: predictions, labels and weights must align");
  double loss = 0.0;
  for (size_t i = 0; i < preds.probs.size(); ++i) {
    const Eigen::MatrixXd& p = preds.probs[i];
    if (static_cast<size_t>(p.rows()) != labels[i].size() ||
        static_cast<size_t>(p.rows()) != weights[i].size())
      throw Error("gce_loss: sentence " + std::to_string(i) +
                  " has misaligned labels or weights");
    for (long t = 0; t < p.rows(); ++t) {
      if (!weights[i][t]) continue;
      int y = labels[i][t];
      if (y < 0 || y >= p.cols())
        throw Error("gce_loss: label index out of range in sentence " +
                    std::to_string(i));
      loss += (1.0 - std::pow(p(t, y), q)) / q;
    }
  }
  return loss;
}

SampleWeights compute_label_weights(const PredictionBatch& preds,
                                    const std::vector<std::vector<int>>& labels,
                                    double tau) {
  if (tau < 0.0 || tau > 1.0)
    throw Error("compute_label_weights: tau must be in [0, 1]");
  if (preds.probs.size() != labels.size())
    throw Error("compute_label_weights: predictions and labels must align");
  SampleWeights weights(preds.probs.size());
  for (size_t i = 0; i < preds.probs.size(); ++i) {
    const Eigen::MatrixXd& p = preds.probs[i];
    if (static_cast<size_t>(p.rows()) != labels[i].size())
      throw Error("compute_label_weights: sentence " + std::to_string(i) +
                  " has misaligned labels");
    weights[i].resize(p.rows());
    for (long t = 0; t < p.rows(); ++t) {
      int y = labels[i][t];
      if (y < 0 || y >= p.cols())
        throw Error("compute_label_weights: label index out of range in "
                    "sentence " + std::to_string(i));
      weights[i][t] = p(t, y) >= tau ? 1 : 0;
    }
  }
  return weights;
}

Adam::Adam(long n, double lr_in)
    : lr(lr_in), m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

void Adam::step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
  if (theta.size() != m.size() || grad.size() != m.size())
    throw Error("Adam: parameter size mismatch");
  ++steps;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
  theta.array() -=
      (lr / bc1) * m.array() / ((v.array() / bc2).sqrt() + eps);
}

// ---------------------------------------------------------------------------
// Shared batch loops
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<int>> tokenize_corpus(const TaggerParams& params,
                                              const Corpus& corpus) {
  std::vector<std::vector<int>> ids;
  ids.reserve(corpus.sentences.size());
  for (const Sentence& s : corpus.sentences)
    ids.push_back(params.token_ids(s.tokens));
  return ids;
}

// KL training against fixed per-token target rows; tokens with mask 0 are
// excluded from loss and gradient. Batch gradients are normalized by total
// batch token count.
TaggerParams train_kl(TaggerParams params,
                      const std::vector<std::vector<int>>& ids,
                      const std::vector<Eigen::MatrixXd>& targets,
                      const SampleWeights& mask, const TrainConfig& cfg,
                      uint64_t salt, TrainLog* log) {
  const size_t n = ids.size();
  const int C = params.scheme.label_count();
  Adam opt(params.total_params(), cfg.learning_rate);
  Rng root(cfg.seed);
  Eigen::VectorXd grad(params.total_params());
  long kept = 0, total = 0;
  for (size_t i = 0; i < n; ++i)
    for (uint8_t w : mask[i]) {
      ++total;
      kept += w;
    }
  for (int epoch = 0; epoch < cfg.epochs_per_phase; ++epoch) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng erng = root.derive(salt + static_cast<uint64_t>(epoch));
    erng.shuffle(order);
    double eloss = 0.0;
    long etokens = 0;
    for (size_t start = 0; start < n; start += cfg.batch_size) {
      size_t stop = std::min(n, start + cfg.batch_size);
      long btokens = 0;
      for (size_t k = start; k < stop; ++k)
        btokens += static_cast<long>(ids[order[k]].size());
      if (btokens == 0) continue;
      grad.setZero();
      double bloss = 0.0;
      for (size_t k = start; k < stop; ++k) {
        size_t idx = order[k];
        SentenceCache cache;
        Eigen::MatrixXd probs = forward_ids(params, ids[idx], &cache);
        Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(probs.rows(), C);
        for (long t = 0; t < probs.rows(); ++t) {
          if (!mask[idx][t]) continue;
          for (int j = 0; j < C; ++j) {
            double tj = targets[idx](t, j);
            if (tj > 0.0)
              bloss += tj * (std::log(tj) - std::log(probs(t, j)));
          }
          dlogits.row(t) = (probs.row(t) - targets[idx].row(t)) / btokens;
        }
        backward_ids(params, cache, dlogits, grad);
      }
      opt.step(params.theta, grad);
      eloss += bloss;
      etokens += btokens;
    }
    if (log != nullptr) {
      log->epoch_losses.push_back(etokens > 0 ? eloss / etokens : 0.0);
      log->kept_tokens.push_back(kept);
      log->total_tokens.push_back(total);
    }
  }
  return params;
}

}  // namespace

// ---------------------------------------------------------------------------
// Noise-robust training
// ---------------------------------------------------------------------------

TaggerParams train_noise_robust(const TaggerParams& init, const Corpus& corpus,
                                LabelSource source, const TrainConfig& cfg,
                                TrainLog* log) {
  cfg.validate();
  if (corpus.sentences.empty())
    throw Error("train_noise_robust: empty corpus");
  if (corpus.scheme != init.scheme)
    throw Error("train_noise_robust: corpus scheme does not match the model");
  auto labels = corpus_labels(corpus, source);
  TaggerParams params = init;
  auto ids = tokenize_corpus(params, corpus);
  const size_t n = ids.size();
  const int C = params.scheme.label_count();
  Adam opt(params.total_params(), cfg.learning_rate);
  Rng root(cfg.seed);
  Eigen::VectorXd grad(params.total_params());

  for (int epoch = 0; epoch < cfg.epochs_per_phase; ++epoch) {
    SampleWeights weights(n);
    if (epoch == 0 || cfg.tau <= 0.0) {
      for (size_t i = 0; i < n; ++i) weights[i].assign(ids[i].size(), 1);
    } else {
      PredictionBatch preds;
      preds.probs.reserve(n);
      for (size_t i = 0; i < n; ++i)
        preds.probs.push_back(forward_ids(params, ids[i]));
      weights = compute_label_weights(preds, labels, cfg.tau);
    }
    long kept = 0, total = 0;
    for (size_t i = 0; i < n; ++i)
      for (uint8_t w : weights[i]) {
        ++total;
        kept += w;
      }

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng erng = root.derive(static_cast<uint64_t>(epoch));
    erng.shuffle(order);

    double eloss = 0.0;
    long etokens = 0;
    for (size_t start = 0; start < n; start += cfg.batch_size) {
      size_t stop = std::min(n, start + cfg.batch_size);
      long btokens = 0;
      for (size_t k = start; k < stop; ++k)
        btokens += static_cast<long>(ids[order[k]].size());
      if (btokens == 0) continue;
      grad.setZero();
      double bloss = 0.0;
      for (size_t k = start; k < stop; ++k) {
        size_t idx = order[k];
        SentenceCache cache;
        Eigen::MatrixXd probs = forward_ids(params, ids[idx], &cache);
        Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(probs.rows(), C);
        for (long t = 0; t < probs.rows(); ++t) {
          if (!weights[idx][t]) continue;
          int y = labels[idx][t];
          double fq = std::pow(probs(t, y), cfg.q);
          bloss += (1.0 - fq) / cfg.q;
          dlogits.row(t) = (fq / btokens) * probs.row(t);
          dlogits(t, y) -= fq / btokens;
        }
        backward_ids(params, cache, dlogits, grad);
      }
      opt.step(params.theta, grad);
      eloss += bloss;
      etokens += btokens;
    }
    if (log != nullptr) {
      log->epoch_losses.push_back(etokens > 0 ? eloss / etokens : 0.0);
      log->kept_tokens.push_back(kept);
      log->total_tokens.push_back(total);
    }
  }
  return params;
}

TaggerParams train_noise_robust(const TaggerParams& init, const Corpus& corpus,
                                const TrainConfig& cfg, TrainLog* log) {
  return train_noise_robust(init, corpus, training_source(corpus), cfg, log);
}

// ---------------------------------------------------------------------------
// Ensemble distillation
// ---------------------------------------------------------------------------

EnsembleResult train_ensemble(const TaggerParams& init, const Corpus& corpus,
                              LabelSource source, const TrainConfig& cfg,
                              TrainLog* log) {
  cfg.validate();
  if (corpus.sentences.empty()) throw Error("train_ensemble: empty corpus");
  EnsembleResult result;
  result.members.reserve(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = cfg.seed + 1 + static_cast<uint64_t>(k);
    result.members.push_back(
        train_noise_robust(init, corpus, source, member_cfg, nullptr));
  }

  auto ids = tokenize_corpus(init, corpus);
  const size_t n = ids.size();
  std::vector<Eigen::MatrixXd> teacher(n);
  for (size_t i = 0; i < n; ++i) {
    teacher[i] = forward_ids(result.members[0], ids[i]);
    for (int k = 1; k < cfg.K; ++k)
      teacher[i] += forward_ids(result.members[k], ids[i]);
    teacher[i] /= static_cast<double>(cfg.K);
  }
  SampleWeights all_tokens(n);
  for (size_t i = 0; i < n; ++i) all_tokens[i].assign(ids[i].size(), 1);
  result.student =
      train_kl(init, ids, teacher, all_tokens, cfg, 1000, log);
  return result;
}

EnsembleResult train_ensemble(const TaggerParams& init, const Corpus& corpus,
                              const TrainConfig& cfg, TrainLog* log) {
  return train_ensemble(init, corpus, training_source(corpus), cfg, log);
}

// ---------------------------------------------------------------------------
// Sharpening, augmentation, self-training
// ---------------------------------------------------------------------------

Eigen::VectorXd sharpen(const Eigen::VectorXd& p) {
  if (p.size() == 0) throw Error("sharpen: empty distribution");
  if (p.minCoeff() < 0.0 || std::abs(p.sum() - 1.0) > 1e-6)
    throw Error("sharpen: input is not a probability distribution");
  Eigen::VectorXd sq = p.cwiseProduct(p);
  return sq / sq.sum();
}

AugmentedSentence augment_sentence(const Sentence& sentence,
                                   const Gazetteers& gazetteers,
                                   double drop_rate, uint64_t seed,
                                   double replace_prob) {
  if (drop_rate < 0.0 || drop_rate > 1.0)
    throw Error("augment_sentence: drop_rate must be in [0, 1]");
  if (replace_prob < 0.0 || replace_prob > 1.0)
    throw Error("augment_sentence: replace_prob must be in [0, 1]");
  const LabelSource source =
      sentence.weak_spans ? LabelSource::weak : LabelSource::gold;
  std::vector<EntitySpan> spans;
  if (const auto* sp = spans_of(sentence, source)) spans = *sp;
  std::sort(spans.begin(), spans.end());

  Rng rng(seed);
  std::vector<std::string> out;
  std::vector<int> src;
  std::vector<EntitySpan> new_spans;
  const int n = sentence.length();
  size_t next = 0;
  for (int t = 0; t < n;) {
    if (next < spans.size() && spans[next].start == t) {
      const EntitySpan& span = spans[next];
      bool replaced = false;
      auto it = gazetteers.find(span.etype);
      if (it != gazetteers.end() && !it->second.empty() &&
          rng.bernoulli(replace_prob)) {
        const auto& phrase =
            it->second[rng.uniform(static_cast<uint64_t>(it->second.size()))];
        int begin = static_cast<int>(out.size());
        for (const std::string& w : phrase) {
          out.push_back(w);
          src.push_back(-1);
        }
        new_spans.push_back({begin, static_cast<int>(out.size()), span.etype});
        replaced = true;
      }
      if (!replaced) {
        int begin = static_cast<int>(out.size());
        for (int k = span.start; k < span.end; ++k) {
          out.push_back(sentence.tokens[k]);
          src.push_back(k);
        }
        new_spans.push_back({begin, static_cast<int>(out.size()), span.etype});
      }
      t = span.end;
      ++next;
    } else {
      if (!(drop_rate > 0.0 && rng.bernoulli(drop_rate))) {
        out.push_back(sentence.tokens[t]);
        src.push_back(t);
      }
      ++t;
    }
  }

  AugmentedSentence result;
  if (out.empty()) {
    result.sentence = sentence;
    result.src_index.resize(n);
    std::iota(result.src_index.begin(), result.src_index.end(), 0);
    return result;
  }
  result.sentence.tokens = std::move(out);
  result.sentence.origin_language = sentence.origin_language;
  if (source == LabelSource::weak)
    result.sentence.weak_spans = std::move(new_spans);
  else
    result.sentence.gold_spans = std::move(new_spans);
  result.src_index = std::move(src);
  return result;
}

TaggerParams self_train(const TaggerParams& init, const Corpus& corpus,
                        const TrainConfig& cfg, const AugmentOptions& augment,
                        TrainLog* log) {
  cfg.validate();
  TaggerParams params = init;
  const size_t n = corpus.sentences.size();
  if (n == 0) return params;
  const int C = params.scheme.label_count();
  auto base_ids = tokenize_corpus(params, corpus);

  for (int round = 0; round < cfg.self_train_rounds; ++round) {
    // Snapshot: fixed targets for the whole round.
    std::vector<Eigen::MatrixXd> targets(n);
    SampleWeights mask(n);
    std::vector<std::vector<int>> pred_labels(n);
    long selected = 0;
    for (size_t i = 0; i < n; ++i) {
      Eigen::MatrixXd p = forward_ids(params, base_ids[i]);
      const long L = p.rows();
      targets[i] = Eigen::MatrixXd::Zero(L, C);
      mask[i].assign(L, 0);
      pred_labels[i].resize(L);
      for (long t = 0; t < L; ++t) {
        int arg = 0;
        for (int j = 1; j < C; ++j)
          if (p(t, j) > p(t, arg)) arg = j;
        pred_labels[i][t] = arg;
        if (p(t, arg) >= cfg.gamma) {
          mask[i][t] = 1;
          targets[i].row(t) = sharpen(p.row(t).transpose()).transpose();
          ++selected;
        }
      }
    }
    if (selected == 0) continue;  // nothing confident enough; round is a no-op

    std::vector<std::vector<int>> ids = base_ids;
    std::vector<Eigen::MatrixXd> all_targets = targets;
    SampleWeights all_mask = mask;
    Rng aug_root = Rng(cfg.seed).derive(2000 + static_cast<uint64_t>(round));
    for (size_t i = 0; i < n; ++i) {
      Sentence snapshot;
      snapshot.tokens = corpus.sentences[i].tokens;
      snapshot.weak_spans = decode_bio(pred_labels[i], params.scheme);
      AugmentedSentence aug =
          augment_sentence(snapshot, augment.gazetteers, augment.drop_rate,
                           aug_root.u64(), augment.replace_prob);
      const auto& toks = aug.sentence.tokens;
      std::vector<int> aug_labels =
          encode_bio(*aug.sentence.weak_spans, static_cast<int>(toks.size()),
                     params.scheme);
      Eigen::MatrixXd t_rows =
          Eigen::MatrixXd::Zero(static_cast<long>(toks.size()), C);
      std::vector<uint8_t> m(toks.size(), 0);
      for (size_t j = 0; j < toks.size(); ++j) {
        int s = aug.src_index[j];
        if (s >= 0) {
          m[j] = mask[i][s];
          if (m[j]) t_rows.row(static_cast<long>(j)) = targets[i].row(s);
        } else {
          // Substituted entity tokens carry their re-encoded hard labels.
          m[j] = 1;
          t_rows(static_cast<long>(j), aug_labels[j]) = 1.0;
        }
      }
      ids.push_back(params.token_ids(toks));
      all_targets.push_back(std::move(t_rows));
      all_mask.push_back(std::move(m));
    }
    params = train_kl(std::move(params), ids, all_targets, all_mask, cfg,
                      3000 + static_cast<uint64_t>(round) * 977, log);
  }
  return params;
}

// ---------------------------------------------------------------------------
// Label-scheme mapping
// ---------------------------------------------------------------------------

Corpus map_label_scheme(const Corpus& corpus, const LabelMapping& mapping) {
  for (const auto& [src_type, dst_type] : mapping.type_map) {
    if (!corpus.scheme.has_type(src_type))
      throw Error("map_label_scheme: source type '" + src_type +
                  "' is not in the corpus scheme");
    if (!mapping.target.has_type(dst_type))
      throw Error("map_label_scheme: target type '" + dst_type +
                  "' is not in the target scheme");
  }
  Corpus out;
  out.scheme = mapping.target;
  out.quality = corpus.quality;
  out.domain_tag = corpus.domain_tag;
  out.sentences.reserve(corpus.sentences.size());
  for (const Sentence& s : corpus.sentences) {
    Sentence mapped;
    mapped.tokens = s.tokens;
    mapped.origin_language = s.origin_language;
    for (LabelSource source : {LabelSource::gold, LabelSource::weak}) {
      const auto* spans = spans_of(s, source);
      if (spans == nullptr) continue;
      std::vector<EntitySpan> mapped_spans;
      for (const EntitySpan& span : *spans) {
        auto it = mapping.type_map.find(span.etype);
        if (it != mapping.type_map.end())
          mapped_spans.push_back({span.start, span.end, it->second});
      }
      if (source == LabelSource::gold)
        mapped.gold_spans = std::move(mapped_spans);
      else
        mapped.weak_spans = std::move(mapped_spans);
    }
    out.sentences.push_back(std::move(mapped));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Staged continual training
// ---------------------------------------------------------------------------

const char* to_string(Phase p) {
  switch (p) {
    case Phase::noise_robust: return "noise_robust";
    case Phase::ensemble: return "ensemble";
    case Phase::self_train: return "self_train";
  }
  return "?";
}

Phase phase_from_string(const std::string& s) {
  if (s == "noise_robust") return Phase::noise_robust;
  if (s == "ensemble") return Phase::ensemble;
  if (s == "self_train") return Phase::self_train;
  throw Error("unknown training phase '" + s + "'");
}

namespace {

std::string stage_label(size_t index, const Stage& stage) {
  if (!stage.name.empty()) return "'" + stage.name + "'";
  return std::to_string(index + 1);
}

}  // namespace

void StagePlan::validate() const {
  for (size_t i = 0; i < stages.size(); ++i) {
    const Stage& st = stages[i];
    const std::string label = stage_label(i, st);
    if (st.corpus == nullptr)
      throw Error("stage plan: stage " + label + " has no corpus");
    if (st.phases.empty())
      throw Error("stage plan: stage " + label + " has no phases");
    if (st.quality == Quality::unlabeled)
      throw Error("stage plan: stage " + label + " must be weak or strong");
    if (st.quality == Quality::strong &&
        !(st.phases.size() == 1 && st.phases[0] == Phase::noise_robust))
      throw Error("stage plan: strong stage " + label +
                  " allows only the noise_robust phase");
    if (st.scheme.types.empty())
      throw Error("stage plan: stage " + label + " has an empty scheme");
    if (st.corpus->scheme != st.scheme)
      throw Error("stage plan: stage " + label +
                  " corpus scheme does not match the stage scheme "
                  "(use map_label_scheme first)");
  }
}

PipelineResult run_controster(const StagePlan& plan, const TrainConfig& config,
                              TaggerParams init,
                              const PipelineOptions& options) {
  config.validate();
  plan.validate();
  PipelineResult result;
  TaggerParams params = std::move(init);

  for (size_t si = 0; si < plan.stages.size(); ++si) {
    const Stage& st = plan.stages[si];
    TrainConfig cfg = config;
    cfg.seed = config.seed + 101 * static_cast<uint64_t>(si);
    if (st.epochs) cfg.epochs_per_phase = *st.epochs;
    const LabelSource source = st.quality == Quality::strong
                                   ? LabelSource::gold
                                   : LabelSource::weak;
    if (st.quality == Quality::strong) cfg.tau = 0.0;  // keep all gold labels

    if (params.scheme != st.scheme)
      params = reinit_head(params, st.scheme, cfg.seed + 17);

    for (Phase phase : st.phases) {
      switch (phase) {
        case Phase::noise_robust:
          params = train_noise_robust(params, *st.corpus, source, cfg);
          break;
        case Phase::ensemble:
          params = train_ensemble(params, *st.corpus, source, cfg).student;
          break;
        case Phase::self_train:
          params = self_train(params, *st.corpus, cfg, options.augment);
          break;
      }
    }

    if (options.eval_corpus != nullptr &&
        options.eval_corpus->scheme == params.scheme) {
      Corpus pred = predict_tags(params, *options.eval_corpus);
      StageEval ev;
      ev.stage = st.name.empty() ? "stage_" + std::to_string(si + 1) : st.name;
      ev.corpus = st.corpus->domain_tag;
      ev.report = span_prf(pred, LabelSource::weak, *options.eval_corpus,
                           LabelSource::gold);
      result.evals.push_back(std::move(ev));
    }
  }
  result.params = std::move(params);
  return result;
}

std::string stage_eval_csv(const std::vector<StageEval>& evals) {
  auto fixed = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  std::string out = "Stage,Corpus,Entity Type,Pre.,Rec.,F1,Support\n";
  for (const StageEval& ev : evals) {
    auto line = [&](const std::string& name, const PRFRow& row) {
      out += ev.stage + "," + ev.corpus + "," + name + "," +
             fixed(row.precision) + "," + fixed(row.recall) + "," +
             fixed(row.f1) + "," + std::to_string(row.support) + "\n";
    };
    for (const auto& [etype, row] : ev.report.per_type) line(etype, row);
    line("Weighted Avg", ev.report.weighted);
    line("Micro", ev.report.micro);
  }
  return out;
}

StagePlanFile read_stage_plan(const std::string& path) {
  json j = parse_json(read_file_text(path, "stage plan"),
                      "stage plan " + path);
  if (!j.is_object() || !j.contains("stages"))
    throw Error("stage plan " + path + ": expected an object with 'stages'");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "stages")
      throw Error("stage plan " + path + ": unknown key '" + key + "'");
  }
  if (!j["stages"].is_array())
    throw Error("stage plan " + path + ": 'stages' must be an array");
  StagePlanFile plan;
  try {
    for (const auto& js : j["stages"]) {
      if (!js.is_object())
        throw Error("stage plan " + path + ": each stage must be an object");
      StageFileSpec spec;
      bool have_corpus = false, have_quality = false, have_phases = false;
      for (const auto& [key, value] : js.items()) {
        if (key == "name") spec.name = value.get<std::string>();
        else if (key == "corpus") {
          spec.corpus_path = value.get<std::string>();
          have_corpus = true;
        } else if (key == "quality") {
          spec.quality = quality_from_string(value.get<std::string>());
          have_quality = true;
        } else if (key == "phases") {
          for (const auto& p : value)
            spec.phases.push_back(phase_from_string(p.get<std::string>()));
          have_phases = true;
        } else if (key == "scheme") {
          for (const auto& t : value)
            spec.scheme_types.push_back(t.get<std::string>());
        } else if (key == "epochs") {
          spec.epochs = value.get<int>();
        } else {
          throw Error("stage plan " + path + ": unknown stage key '" + key +
                      "'");
        }
      }
      if (!have_corpus || !have_quality || !have_phases)
        throw Error("stage plan " + path +
                    ": each stage needs corpus, quality and phases");
      plan.stages.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw Error("stage plan " + path + ": " + e.what());
  }
  if (plan.stages.empty())
    throw Error("stage plan " + path + ": no stages");
  return plan;
}

}  // namespace wsner
