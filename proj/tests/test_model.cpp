// tests/test_model.cpp
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wsner/core.hpp"
#include "wsner/model.hpp"
#include "wsner/rng.hpp"

using namespace wsner;

namespace {

Corpus tiny_corpus() {
  Corpus c;
  c.scheme = TagScheme::of({"Disease", "Location"});
  c.quality = Quality::strong;
  auto add = [&](std::vector<std::string> toks) {
    Sentence s;
    s.tokens = std::move(toks);
    s.gold_spans = std::vector<EntitySpan>{};
    c.sentences.push_back(std::move(s));
  };
  add({"marsh", "fever", "spread", "through", "Dunmore"});
  add({"clinics", "in", "Dunmore", "reported", "new", "cases"});
  add({"officials", "urged", "calm"});
  return c;
}

TaggerParams tiny_params(uint64_t seed = 7) {
  Corpus c = tiny_corpus();
  Vocab v = Vocab::build({&c});
  return TaggerParams::init(c.scheme, v, ModelDims{6, 4}, seed);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("vocab reserves pad and unk and dedupes in first-seen order") {
  Corpus c = tiny_corpus();
  Vocab v = Vocab::build({&c});
  CHECK(v.id_to_token[Vocab::kPad] == "<pad>");
  CHECK(v.id_to_token[Vocab::kUnk] == "<unk>");
  CHECK(v.id_to_token[2] == "marsh");
  CHECK(v.id("marsh") == 2);
  CHECK(v.id("never-seen") == Vocab::kUnk);
  // "Dunmore" appears in two sentences but gets one id.
  int first = v.id("Dunmore");
  CHECK(first > 1);
  long n = 0;
  for (const auto& t : v.id_to_token)
    if (t == "Dunmore") ++n;
  CHECK(n == 1);
  CHECK_THROWS_AS(Vocab::build({nullptr}), Error);
}

TEST_CASE("lowercase vocab folds case in build and lookup") {
  Corpus c = tiny_corpus();
  Vocab v = Vocab::build({&c}, /*lowercase=*/true);
  CHECK(v.id("Dunmore") == v.id("dunmore"));
  CHECK(v.id("DUNMORE") == v.id("dunmore"));
  for (const auto& t : v.id_to_token) {
    for (char ch : t) CHECK_FALSE((ch >= 'A' && ch <= 'Z'));
  }
  Vocab cased = Vocab::build({&c});
  CHECK(cased.id("DUNMORE") == Vocab::kUnk);
}

TEST_CASE("vocab build over multiple corpora concatenates in order") {
  Corpus a = tiny_corpus();
  Corpus b;
  b.scheme = a.scheme;
  Sentence s;
  s.tokens = {"quarantine", "marsh"};
  b.sentences.push_back(s);
  Vocab v = Vocab::build({&a, &b});
  CHECK(v.id("quarantine") > v.id("cases"));  // appended after corpus a
  CHECK(v.id("marsh") == 2);                  // already present, kept
}

TEST_CASE("parameter init is seeded and sized") {
  TaggerParams p = tiny_params(7);
  CHECK(p.theta.size() == p.total_params());
  CHECK(p.total_params() == p.encoder_params() + p.head_params());
  CHECK(p.encoder->output_dim() == 2 * p.dims.hidden_dim);
  CHECK(p.head_params() ==
        p.scheme.label_count() * (p.encoder->output_dim() + 1));

  TaggerParams q = tiny_params(7);
  CHECK(p.theta == q.theta);
  TaggerParams r = tiny_params(8);
  CHECK(p.theta != r.theta);
}

TEST_CASE("token_ids maps through the vocab") {
  TaggerParams p = tiny_params();
  std::vector<int> ids = p.token_ids({"marsh", "mystery"});
  REQUIRE(ids.size() == 2);
  CHECK(ids[0] == p.vocab.id("marsh"));
  CHECK(ids[1] == Vocab::kUnk);
}

TEST_CASE("forward yields one stochastic matrix per sentence") {
  Corpus c = tiny_corpus();
  TaggerParams p = tiny_params();
  PredictionBatch batch = forward(p, c);
  REQUIRE(batch.probs.size() == c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    const Eigen::MatrixXd& m = batch.probs[i];
    CHECK(m.rows() == static_cast<long>(c.sentences[i].tokens.size()));
    CHECK(m.cols() == p.scheme.label_count());
    for (long r = 0; r < m.rows(); ++r) {
      CHECK(m.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(m.row(r).minCoeff() > 0.0);
    }
  }
  // Deterministic.
  PredictionBatch again = forward(p, c);
  for (size_t i = 0; i < batch.probs.size(); ++i)
    CHECK(batch.probs[i] == again.probs[i]);
}

TEST_CASE("backward matches central finite differences under cross entropy") {
  Corpus c = tiny_corpus();
  TaggerParams p = tiny_params(11);
  Rng rng(99);

  // Fixed random labels per sentence.
  std::vector<std::vector<int>> labels;
  for (const Sentence& s : c.sentences) {
    std::vector<int> row(s.tokens.size());
    for (int& y : row)
      y = static_cast<int>(rng.uniform(p.scheme.label_count()));
    labels.push_back(row);
  }

  auto loss_at = [&](const Eigen::VectorXd& theta) {
    TaggerParams q = p;
    q.theta = theta;
    double loss = 0.0;
    for (size_t i = 0; i < c.size(); ++i) {
      Eigen::MatrixXd probs =
          forward_ids(q, q.token_ids(c.sentences[i].tokens));
      for (long t = 0; t < probs.rows(); ++t)
        loss -= std::log(probs(t, labels[i][t]));
    }
    return loss;
  };

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.total_params());
  for (size_t i = 0; i < c.size(); ++i) {
    SentenceCache cache;
    Eigen::MatrixXd probs =
        forward_ids(p, p.token_ids(c.sentences[i].tokens), &cache);
    Eigen::MatrixXd dlogits = probs;
    for (long t = 0; t < probs.rows(); ++t) dlogits(t, labels[i][t]) -= 1.0;
    backward_ids(p, cache, dlogits, grad);
  }

  const double h = 1e-5;
  int checked = 0, bad = 0;
  for (int rep = 0; rep < 120; ++rep) {
    long k = static_cast<long>(rng.uniform(
        static_cast<uint64_t>(p.total_params())));
    Eigen::VectorXd tp = p.theta, tm = p.theta;
    tp[k] += h;
    tm[k] -= h;
    double fd = (loss_at(tp) - loss_at(tm)) / (2 * h);
    double denom = std::max({std::abs(fd), std::abs(grad[k]), 1e-8});
    double rel = std::abs(fd - grad[k]) / denom;
    ++checked;
    if (rel > 1e-4 && std::abs(fd - grad[k]) > 1e-9) ++bad;
  }
  CHECK(checked == 120);
  CHECK(bad == 0);
}

TEST_CASE("unused embedding rows receive zero gradient") {
  TaggerParams p = tiny_params();
  Sentence s;
  s.tokens = {"marsh", "fever"};
  SentenceCache cache;
  Eigen::MatrixXd probs = forward_ids(p, p.token_ids(s.tokens), &cache);
  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Ones(probs.rows(), probs.cols());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.total_params());
  backward_ids(p, cache, dlogits, grad);
  // The pad row (token id 0) never appears in any input, so its embedding
  // slice cannot pick up gradient.
  long emb = static_cast<long>(p.dims.emb_dim);
  CHECK(grad.segment(0, emb).norm() == 0.0);
  CHECK(grad.norm() > 0.0);
}

TEST_CASE("predict_tags fills weak spans and keeps gold untouched") {
  Corpus c = tiny_corpus();
  c.sentences[0].gold_spans = std::vector<EntitySpan>{{0, 2, "Disease"}};
  TaggerParams p = tiny_params();
  Corpus out = predict_tags(p, c);
  REQUIRE(out.size() == c.size());
  CHECK(out.quality == Quality::weak);
  CHECK(out.scheme == p.scheme);
  for (size_t i = 0; i < out.size(); ++i) {
    const Sentence& s = out.sentences[i];
    REQUIRE(s.weak_spans.has_value());
    CHECK_NOTHROW(
        validate_spans(*s.weak_spans, static_cast<int>(s.tokens.size())));
    for (const EntitySpan& sp : *s.weak_spans)
      CHECK(p.scheme.has_type(sp.etype));
    CHECK(s.gold_spans == c.sentences[i].gold_spans);
    CHECK(s.tokens == c.sentences[i].tokens);
  }
  Corpus again = predict_tags(p, c);
  for (size_t i = 0; i < out.size(); ++i)
    CHECK(out.sentences[i].weak_spans == again.sentences[i].weak_spans);
}

TEST_CASE("reinit_head carries the encoder bit-for-bit") {
  TaggerParams p = tiny_params(3);
  uint64_t before = encoder_param_hash(p);
  TagScheme wider = TagScheme::of({"Person", "Location", "Organisation"});
  TaggerParams q = reinit_head(p, wider, 55);
  CHECK(q.scheme == wider);
  CHECK(q.theta.size() == q.total_params());
  CHECK(encoder_param_hash(q) == before);
  CHECK(q.theta.head(p.encoder_params()) == p.theta.head(p.encoder_params()));
  // Same seed, same head; different seed, different head.
  TaggerParams q2 = reinit_head(p, wider, 55);
  CHECK(q.theta == q2.theta);
  TaggerParams q3 = reinit_head(p, wider, 56);
  CHECK(q.theta != q3.theta);
}

TEST_CASE("encoder hash tracks encoder coordinates only") {
  TaggerParams p = tiny_params();
  uint64_t h0 = encoder_param_hash(p);
  TaggerParams head_changed = p;
  head_changed.theta[p.encoder_params()] += 1.0;
  CHECK(encoder_param_hash(head_changed) == h0);
  TaggerParams enc_changed = p;
  enc_changed.theta[0] += 1.0;
  CHECK(encoder_param_hash(enc_changed) != h0);
}

TEST_CASE("checkpoint round-trip is exact") {
  TaggerParams p = tiny_params(123);
  std::string path = temp_path("wsner_test_ckpt.bin");
  save_checkpoint(p, path);
  TaggerParams q = load_checkpoint(path);
  CHECK(q.scheme == p.scheme);
  CHECK(q.vocab == p.vocab);
  CHECK(q.dims == p.dims);
  CHECK(q.encoder->kind() == p.encoder->kind());
  REQUIRE(q.theta.size() == p.theta.size());
  CHECK(q.theta == p.theta);  // bitwise: doubles serialized verbatim

  // A loaded model predicts identically.
  Corpus c = tiny_corpus();
  PredictionBatch a = forward(p, c), b = forward(q, c);
  for (size_t i = 0; i < a.probs.size(); ++i) CHECK(a.probs[i] == b.probs[i]);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loading rejects damaged files") {
  std::string path = temp_path("wsner_test_ckpt_bad.bin");
  CHECK_THROWS_AS(load_checkpoint(path + ".does-not-exist"), Error);

  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint at all";
  }
  CHECK_THROWS_AS(load_checkpoint(path), Error);

  // Truncate a valid checkpoint.
  TaggerParams p = tiny_params();
  save_checkpoint(p, path);
  {
    std::ifstream in(path, std::ios::binary);
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(buf.data(), static_cast<long>(buf.size() / 2));
  }
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  std::filesystem::remove(path);
}
