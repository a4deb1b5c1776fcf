// src/model.cpp
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

#include "wsner/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

#include "wsner/data.hpp"

namespace wsner {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

std::string lower_copy(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

Vocab Vocab::build(const std::vector<const Corpus*>& corpora, bool lowercase) {
  Vocab v;
  v.lowercase = lowercase;
  v.id_to_token = {"<pad>", "<unk>"};
  v.token_to_id = {{"<pad>", kPad}, {"<unk>", kUnk}};
  for (const Corpus* corpus : corpora) {
    if (corpus == nullptr) throw Error("Vocab::build: null corpus");
    for (const Sentence& sentence : corpus->sentences) {
      for (const std::string& token : sentence.tokens) {
        std::string key = lowercase ? lower_copy(token) : token;
        if (v.token_to_id.emplace(key, v.size()).second)
          v.id_to_token.push_back(std::move(key));
      }
    }
  }
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = token_to_id.find(lowercase ? lower_copy(token) : token);
  return it == token_to_id.end() ? kUnk : it->second;
}

// ---------------------------------------------------------------------------
// Bidirectional recurrent encoder
// ---------------------------------------------------------------------------

namespace {

// Flat layout: [emb VxE | Wxf HxE | Whf HxH | bf H | Wxb HxE | Whb HxH | bb H],
// every matrix row-major.
class BiRnnEncoder final : public ContextEncoder {
 public:
  BiRnnEncoder(int vocab_size, ModelDims dims)
      : V_(vocab_size), E_(dims.emb_dim), H_(dims.hidden_dim) {
    if (V_ < 2 || E_ <= 0 || H_ <= 0)
      throw Error("BiRnnEncoder: invalid dimensions");
    off_emb_ = 0;
    off_wxf_ = off_emb_ + static_cast<long>(V_) * E_;
    off_whf_ = off_wxf_ + static_cast<long>(H_) * E_;
    off_bf_ = off_whf_ + static_cast<long>(H_) * H_;
    off_wxb_ = off_bf_ + H_;
    off_whb_ = off_wxb_ + static_cast<long>(H_) * E_;
    off_bb_ = off_whb_ + static_cast<long>(H_) * H_;
    total_ = off_bb_ + H_;
  }

  std::string kind() const override { return "birnn"; }
  int output_dim() const override { return 2 * H_; }
  long param_count() const override { return total_; }

  void init_params(Eigen::Ref<Eigen::VectorXd> params, Rng& rng) const override {
    if (params.size() != total_) throw Error("BiRnnEncoder: bad param size");
    double* d = params.data();
    for (long i = off_emb_; i < off_wxf_; ++i) d[i] = rng.normal(0.0, 0.1);
    const double ax = std::sqrt(1.0 / E_);
    const double ah = std::sqrt(1.0 / H_);
    for (long i = off_wxf_; i < off_whf_; ++i) d[i] = rng.uniform_real(-ax, ax);
    for (long i = off_whf_; i < off_bf_; ++i) d[i] = rng.uniform_real(-ah, ah);
    for (long i = off_bf_; i < off_wxb_; ++i) d[i] = 0.0;
    for (long i = off_wxb_; i < off_whb_; ++i) d[i] = rng.uniform_real(-ax, ax);
    for (long i = off_whb_; i < off_bb_; ++i) d[i] = rng.uniform_real(-ah, ah);
    for (long i = off_bb_; i < total_; ++i) d[i] = 0.0;
  }

  struct Cache final : EncoderCache {
    std::vector<int> ids;
    RowMat x;   // L x E
    RowMat hf;  // L x H
    RowMat hb;  // L x H
  };

  void forward(const Eigen::VectorXd& params, const std::vector<int>& ids,
               Eigen::MatrixXd* states,
               std::unique_ptr<EncoderCache>* cache) const override {
    const long L = static_cast<long>(ids.size());
    const double* d = params.data();
    CRowMap emb(d + off_emb_, V_, E_);
    CRowMap wxf(d + off_wxf_, H_, E_), whf(d + off_whf_, H_, H_);
    CRowMap wxb(d + off_wxb_, H_, E_), whb(d + off_whb_, H_, H_);
    CVecMap bf(d + off_bf_, H_), bb(d + off_bb_, H_);

    RowMat x(L, E_);
    for (long t = 0; t < L; ++t) {
      int id = ids[t];
      if (id < 0 || id >= V_) throw Error("BiRnnEncoder: token id out of range");
      x.row(t) = emb.row(id);
    }
    RowMat xf = x * wxf.transpose();  // L x H
    RowMat xb = x * wxb.transpose();
    RowMat hf(L, H_), hb(L, H_);
    Eigen::RowVectorXd prev = Eigen::RowVectorXd::Zero(H_);
    for (long t = 0; t < L; ++t) {
      hf.row(t) =
          (xf.row(t) + prev * whf.transpose() + bf.transpose()).array().tanh();
      prev = hf.row(t);
    }
    prev.setZero();
    for (long t = L - 1; t >= 0; --t) {
      hb.row(t) =
          (xb.row(t) + prev * whb.transpose() + bb.transpose()).array().tanh();
      prev = hb.row(t);
    }
    states->resize(L, 2 * H_);
    states->leftCols(H_) = hf;
    states->rightCols(H_) = hb;
    if (cache != nullptr) {
      auto c = std::make_unique<Cache>();
      c->ids = ids;
      c->x = std::move(x);
      c->hf = std::move(hf);
      c->hb = std::move(hb);
      *cache = std::move(c);
    }
  }

  void backward(const Eigen::VectorXd& params, const EncoderCache& cache_base,
                const Eigen::MatrixXd& dstates,
                Eigen::Ref<Eigen::VectorXd> grad) const override {
    const auto& c = dynamic_cast<const Cache&>(cache_base);
    const long L = c.x.rows();
    const double* d = params.data();
    CRowMap wxf(d + off_wxf_, H_, E_), whf(d + off_whf_, H_, H_);
    CRowMap wxb(d + off_wxb_, H_, E_), whb(d + off_whb_, H_, H_);
    double* g = grad.data();
    RowMap gemb(g + off_emb_, V_, E_);
    RowMap gwxf(g + off_wxf_, H_, E_), gwhf(g + off_whf_, H_, H_);
    RowMap gwxb(g + off_wxb_, H_, E_), gwhb(g + off_whb_, H_, H_);
    VecMap gbf(g + off_bf_, H_), gbb(g + off_bb_, H_);

    // Pre-activation gradients for both directions, then batched products.
    RowMat daf(L, H_), dab(L, H_);
    Eigen::RowVectorXd carry = Eigen::RowVectorXd::Zero(H_);
    for (long t = L - 1; t >= 0; --t) {
      Eigen::RowVectorXd dh = dstates.row(t).head(H_) + carry;
      daf.row(t) = dh.array() * (1.0 - c.hf.row(t).array().square());
      carry = daf.row(t) * whf;
    }
    carry.setZero();
    for (long t = 0; t < L; ++t) {
      Eigen::RowVectorXd dh = dstates.row(t).tail(H_) + carry;
      dab.row(t) = dh.array() * (1.0 - c.hb.row(t).array().square());
      carry = dab.row(t) * whb;
    }
    gwxf += daf.transpose() * c.x;
    gwxb += dab.transpose() * c.x;
    gbf += daf.colwise().sum().transpose();
    gbb += dab.colwise().sum().transpose();
    if (L > 1) {
      gwhf += daf.bottomRows(L - 1).transpose() * c.hf.topRows(L - 1);
      gwhb += dab.topRows(L - 1).transpose() * c.hb.bottomRows(L - 1);
    }
    RowMat dx = daf * wxf + dab * wxb;  // L x E
    for (long t = 0; t < L; ++t) gemb.row(c.ids[t]) += dx.row(t);
  }

 private:
  int V_, E_, H_;
  long off_emb_, off_wxf_, off_whf_, off_bf_, off_wxb_, off_whb_, off_bb_, total_;
};

// Head W is label_count x D row-major, followed by label_count biases.
void init_head(Eigen::Ref<Eigen::VectorXd> head, int labels, int dim, Rng& rng) {
  const double a = std::sqrt(1.0 / dim);
  long wn = static_cast<long>(labels) * dim;
  for (long i = 0; i < wn; ++i) head[i] = rng.uniform_real(-a, a);
  for (int i = 0; i < labels; ++i) head[wn + i] = 0.0;
  // Bias the outside label so an untrained model starts near the label
  // marginals instead of spraying entity tags everywhere.
  head[wn] = 2.0;
}

}  // namespace

std::shared_ptr<const ContextEncoder> make_birnn_encoder(int vocab_size,
                                                         ModelDims dims) {
  return std::make_shared<BiRnnEncoder>(vocab_size, dims);
}

// ---------------------------------------------------------------------------
// TaggerParams
// ---------------------------------------------------------------------------

TaggerParams TaggerParams::init(const TagScheme& scheme, Vocab vocab,
                                ModelDims dims, uint64_t seed) {
  if (dims.emb_dim <= 0 || dims.hidden_dim <= 0)
    throw Error("TaggerParams::init: dimensions must be positive");
  TaggerParams p;
  p.scheme = scheme;
  p.vocab = std::move(vocab);
  p.dims = dims;
  p.encoder = make_birnn_encoder(p.vocab.size(), dims);
  p.theta = Eigen::VectorXd::Zero(p.total_params());
  Rng rng(seed);
  p.encoder->init_params(p.theta.head(p.encoder_params()), rng);
  init_head(p.theta.tail(p.head_params()), p.scheme.label_count(),
            p.encoder->output_dim(), rng);
  return p;
}

std::vector<int> TaggerParams::token_ids(
    const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(vocab.id(t));
  return ids;
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

Eigen::MatrixXd forward_ids(const TaggerParams& params,
                            const std::vector<int>& ids, SentenceCache* cache) {
  if (ids.empty()) throw Error("forward: empty sentence");
  const long enc_n = params.encoder_params();
  const int D = params.encoder->output_dim();
  const int C = params.scheme.label_count();

  Eigen::MatrixXd states;
  std::unique_ptr<EncoderCache> enc_cache;
  params.encoder->forward(params.theta, ids, &states,
                          cache != nullptr ? &enc_cache : nullptr);

  CRowMap w(params.theta.data() + enc_n, C, D);
  CVecMap b(params.theta.data() + enc_n + static_cast<long>(C) * D, C);
  Eigen::MatrixXd logits = states * w.transpose();
  logits.rowwise() += b.transpose();

  Eigen::MatrixXd probs(logits.rows(), C);
  for (long t = 0; t < logits.rows(); ++t) {
    Eigen::RowVectorXd row = logits.row(t);
    double m = row.maxCoeff();
    Eigen::ArrayXd e = (row.transpose().array() - m).exp();
    probs.row(t) = (e / e.sum()).transpose();
  }
  if (cache != nullptr) {
    cache->ids = ids;
    cache->enc = std::move(enc_cache);
    cache->states = std::move(states);
    cache->probs = probs;
  }
  return probs;
}

void backward_ids(const TaggerParams& params, const SentenceCache& cache,
                  const Eigen::MatrixXd& dlogits, Eigen::VectorXd& grad) {
  if (grad.size() != params.total_params())
    throw Error("backward: gradient size mismatch");
  if (dlogits.rows() != cache.states.rows() ||
      dlogits.cols() != params.scheme.label_count())
    throw Error("backward: dlogits shape mismatch");
  const long enc_n = params.encoder_params();
  const int D = params.encoder->output_dim();
  const int C = params.scheme.label_count();

  CRowMap w(params.theta.data() + enc_n, C, D);
  RowMap gw(grad.data() + enc_n, C, D);
  VecMap gb(grad.data() + enc_n + static_cast<long>(C) * D, C);

  gw += dlogits.transpose() * cache.states;
  gb += dlogits.colwise().sum().transpose();
  Eigen::MatrixXd dstates = dlogits * w;  // L x D
  params.encoder->backward(params.theta, *cache.enc, dstates,
                           grad.head(enc_n));
}

PredictionBatch forward(const TaggerParams& params,
                        const std::vector<Sentence>& sentences) {
  PredictionBatch batch;
  batch.probs.reserve(sentences.size());
  for (const Sentence& s : sentences)
    batch.probs.push_back(forward_ids(params, params.token_ids(s.tokens)));
  return batch;
}

PredictionBatch forward(const TaggerParams& params, const Corpus& corpus) {
  return forward(params, corpus.sentences);
}

Corpus predict_tags(const TaggerParams& params, const Corpus& corpus) {
  Corpus out;
  out.scheme = params.scheme;
  out.quality = Quality::weak;
  out.domain_tag = corpus.domain_tag;
  out.sentences.reserve(corpus.sentences.size());
  for (const Sentence& s : corpus.sentences) {
    Eigen::MatrixXd probs = forward_ids(params, params.token_ids(s.tokens));
    std::vector<int> labels(probs.rows());
    for (long t = 0; t < probs.rows(); ++t) {
      int best = 0;
      for (int c = 1; c < probs.cols(); ++c)
        if (probs(t, c) > probs(t, best)) best = c;
      labels[t] = best;
    }
    Sentence pred = s;
    pred.weak_spans = decode_bio(labels, params.scheme);
    out.sentences.push_back(std::move(pred));
  }
  return out;
}

TaggerParams reinit_head(const TaggerParams& params, const TagScheme& new_scheme,
                         uint64_t seed) {
  TaggerParams out;
  out.scheme = new_scheme;
  out.vocab = params.vocab;
  out.dims = params.dims;
  out.encoder = params.encoder;
  out.theta = Eigen::VectorXd::Zero(out.total_params());
  out.theta.head(out.encoder_params()) =
      params.theta.head(params.encoder_params());
  Rng rng(seed);
  init_head(out.theta.tail(out.head_params()), new_scheme.label_count(),
            out.encoder->output_dim(), rng);
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'W', 'S', 'N', 'E', 'R', 'C', 'K', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string* s, uint32_t v) {
  s->append(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u64(std::string* s, uint64_t v) {
  s->append(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_str(std::string* s, const std::string& v) {
  put_u32(s, static_cast<uint32_t>(v.size()));
  s->append(v);
}

struct ByteReader {
  const std::string& buf;
  const std::string& path;
  size_t pos = 0;

  const char* take(size_t n) {
    if (pos + n > buf.size())
      throw Error("checkpoint truncated: " + path);
    const char* p = buf.data() + pos;
    pos += n;
    return p;
  }
  uint32_t u32() {
    uint32_t v;
    std::memcpy(&v, take(sizeof v), sizeof v);
    return v;
  }
  uint64_t u64() {
    uint64_t v;
    std::memcpy(&v, take(sizeof v), sizeof v);
    return v;
  }
  std::string str() {
    uint32_t n = u32();
    const char* p = take(n);
    return std::string(p, n);
  }
};

}  // namespace

void save_checkpoint(const TaggerParams& params, const std::string& path) {
  std::string buf;
  buf.append(kMagic, sizeof kMagic);
  put_u32(&buf, kVersion);
  put_str(&buf, params.encoder->kind());
  put_u32(&buf, static_cast<uint32_t>(params.scheme.types.size()));
  for (const std::string& t : params.scheme.types) put_str(&buf, t);
  buf.push_back(params.vocab.lowercase ? 1 : 0);
  put_u32(&buf, static_cast<uint32_t>(params.vocab.id_to_token.size()));
  for (const std::string& t : params.vocab.id_to_token) put_str(&buf, t);
  put_u32(&buf, static_cast<uint32_t>(params.dims.emb_dim));
  put_u32(&buf, static_cast<uint32_t>(params.dims.hidden_dim));
  put_u64(&buf, static_cast<uint64_t>(params.theta.size()));
  buf.append(reinterpret_cast<const char*>(params.theta.data()),
             sizeof(double) * static_cast<size_t>(params.theta.size()));
  atomic_write_file(path, buf);
}

TaggerParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string buf = ss.str();

  ByteReader r{buf, path};
  if (std::memcmp(r.take(sizeof kMagic), kMagic, sizeof kMagic) != 0)
    throw Error("checkpoint: bad magic in " + path);
  uint32_t version = r.u32();
  if (version != kVersion)
    throw Error("checkpoint: unsupported version " + std::to_string(version) +
                " in " + path);
  std::string kind = r.str();

  TaggerParams p;
  uint32_t n_types = r.u32();
  p.scheme.types.reserve(n_types);
  for (uint32_t i = 0; i < n_types; ++i) p.scheme.types.push_back(r.str());
  p.vocab.lowercase = *r.take(1) != 0;
  uint32_t n_tokens = r.u32();
  p.vocab.id_to_token.reserve(n_tokens);
  for (uint32_t i = 0; i < n_tokens; ++i) {
    p.vocab.id_to_token.push_back(r.str());
    p.vocab.token_to_id.emplace(p.vocab.id_to_token.back(),
                                static_cast<int>(i));
  }
  p.dims.emb_dim = static_cast<int>(r.u32());
  p.dims.hidden_dim = static_cast<int>(r.u32());
  if (kind == "birnn") {
    p.encoder = make_birnn_encoder(p.vocab.size(), p.dims);
  } else {
    throw Error("checkpoint: unknown encoder kind '" + kind + "' in " + path);
  }
  uint64_t n_theta = r.u64();
  if (n_theta != static_cast<uint64_t>(p.total_params()))
    throw Error("checkpoint: parameter count mismatch in " + path);
  p.theta.resize(static_cast<long>(n_theta));
  std::memcpy(p.theta.data(), r.take(sizeof(double) * n_theta),
              sizeof(double) * n_theta);
  return p;
}

uint64_t encoder_param_hash(const TaggerParams& params) {
  const auto* bytes =
      reinterpret_cast<const unsigned char*>(params.theta.data());
  size_t n = sizeof(double) * static_cast<size_t>(params.encoder_params());
  uint64_t h = 1469598103934665603ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace wsner
