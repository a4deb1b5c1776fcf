// wsner/model.hpp
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

#ifndef WSNER_MODEL_HPP_
#define WSNER_MODEL_HPP_

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "wsner/core.hpp"
#include "wsner/rng.hpp"

namespace wsner {

// Token vocabulary. Ids 0 and 1 are reserved for <pad> and <unk>; unknown
// tokens map to <unk>. Case is preserved by default (entity casing is
// informative).
struct Vocab {
  std::vector<std::string> id_to_token;
  std::unordered_map<std::string, int> token_to_id;
  bool lowercase = false;

  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  static Vocab build(const std::vector<const Corpus*>& corpora,
                     bool lowercase = false);

  int id(const std::string& token) const;
  int size() const { return static_cast<int>(id_to_token.size()); }
  bool operator==(const Vocab& o) const {
    return id_to_token == o.id_to_token && lowercase == o.lowercase;
  }
};

struct ModelDims {
  int emb_dim = 64;
  int hidden_dim = 128;
  bool operator==(const ModelDims&) const = default;
};

// Opaque per-sentence forward state owned by the encoder implementation.
struct EncoderCache {
  virtual ~EncoderCache() = default;
};

// Contextual encoder interface: token ids in, one context vector per token
// out, with manual reverse-mode gradients. The bundled implementation is a
// token-embedding + bidirectional recurrent encoder; a pretrained
// contextual encoder can be slotted in behind the same interface.
class ContextEncoder {
 public:
  virtual ~ContextEncoder() = default;
  virtual std::string kind() const = 0;
  virtual int output_dim() const = 0;
  virtual long param_count() const = 0;
  virtual void init_params(Eigen::Ref<Eigen::VectorXd> params, Rng& rng) const = 0;
  // states: L x output_dim. cache may be null when no backward pass follows.
  virtual void forward(const Eigen::VectorXd& params,
                       const std::vector<int>& token_ids,
                       Eigen::MatrixXd* states,
                       std::unique_ptr<EncoderCache>* cache) const = 0;
  // Accumulates into grad (same layout as params).
  virtual void backward(const Eigen::VectorXd& params, const EncoderCache& cache,
                        const Eigen::MatrixXd& dstates,
                        Eigen::Ref<Eigen::VectorXd> grad) const = 0;
};

// Embedding lookup followed by one bidirectional tanh recurrent layer;
// output dim is 2 * hidden_dim.
std::shared_ptr<const ContextEncoder> make_birnn_encoder(int vocab_size,
                                                         ModelDims dims);

// Encoder parameters plus a linear softmax head bound to a tag scheme.
// All parameters live in one flat vector: [encoder | head W | head b], with
// head W of shape label_count x output_dim (row-major) and head b of
// label_count. The flat layout keeps optimizer state, checkpointing, and
// finite-difference checks trivial.
struct TaggerParams {
  TagScheme scheme;
  Vocab vocab;
  ModelDims dims;
  std::shared_ptr<const ContextEncoder> encoder;
  Eigen::VectorXd theta;

  static TaggerParams init(const TagScheme& scheme, Vocab vocab, ModelDims dims,
                           uint64_t seed);

  long encoder_params() const { return encoder->param_count(); }
  long head_params() const {
    return static_cast<long>(scheme.label_count()) *
               (encoder->output_dim() + 1);
  }
  long total_params() const { return encoder_params() + head_params(); }

  std::vector<int> token_ids(const std::vector<std::string>& tokens) const;
};

// Per-token probability rows, one L x label_count matrix per sentence.
// Rows sum to 1.
struct PredictionBatch {
  std::vector<Eigen::MatrixXd> probs;
};

// Forward state kept for the backward pass.
struct SentenceCache {
  std::vector<int> ids;
  std::unique_ptr<EncoderCache> enc;
  Eigen::MatrixXd states;  // L x D
  Eigen::MatrixXd probs;   // L x C
};

// Low-level single-sentence path used by the training loops.
Eigen::MatrixXd forward_ids(const TaggerParams& params,
                            const std::vector<int>& ids,
                            SentenceCache* cache = nullptr);
// dlogits: gradient of the loss wrt pre-softmax logits, L x C. Accumulates
// parameter gradients into grad (size total_params).
void backward_ids(const TaggerParams& params, const SentenceCache& cache,
                  const Eigen::MatrixXd& dlogits, Eigen::VectorXd& grad);

// Batch forward (evaluation mode; deterministic).
PredictionBatch forward(const TaggerParams& params,
                        const std::vector<Sentence>& sentences);
PredictionBatch forward(const TaggerParams& params, const Corpus& corpus);

// Argmax tags decoded (with repair) into spans. Predictions land in
// weak_spans of the returned corpus; gold labels pass through untouched.
Corpus predict_tags(const TaggerParams& params, const Corpus& corpus);

// New head for new_scheme, freshly initialized from seed; encoder parameters
// are copied bit-for-bit.
TaggerParams reinit_head(const TaggerParams& params, const TagScheme& new_scheme,
                         uint64_t seed);

// Versioned binary checkpoint; load(save(p)) reproduces p exactly.
void save_checkpoint(const TaggerParams& params, const std::string& path);
TaggerParams load_checkpoint(const std::string& path);

// FNV-1a over the encoder slice of theta; used to assert encoder transfer.
uint64_t encoder_param_hash(const TaggerParams& params);

}  // namespace wsner

#endif  // WSNER_MODEL_HPP_
