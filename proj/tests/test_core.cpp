// tests/test_core.cpp
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

#include <algorithm>
#include <set>

#include "wsner/core.hpp"
#include "wsner/rng.hpp"

using namespace wsner;

namespace {

// Random well-formed span list over a sentence of the given length.
std::vector<EntitySpan> random_spans(Rng& rng, int length,
                                     const TagScheme& scheme) {
  std::vector<EntitySpan> spans;
  int pos = 0;
  while (pos < length) {
    if (rng.bernoulli(0.4)) {
      int max_len = std::min(3, length - pos);
      int len = 1 + static_cast<int>(rng.uniform(max_len));
      spans.push_back({pos, pos + len,
                       scheme.types[rng.uniform(scheme.types.size())]});
      pos += len;
    }
    ++pos;
  }
  return spans;
}

}  // namespace

TEST_CASE("scheme label layout is O, then B/I pairs in type order") {
  TagScheme s = TagScheme::of({"Disease", "Location"});
  CHECK(s.label_count() == 5);
  CHECK(s.tag_index("O") == 0);
  CHECK(s.tag_index("B-Disease") == 1);
  CHECK(s.tag_index("I-Disease") == 2);
  CHECK(s.tag_index("B-Location") == 3);
  CHECK(s.tag_index("I-Location") == 4);
  CHECK(s.tag_name(0) == "O");
  CHECK(s.tag_name(3) == "B-Location");
  CHECK(s.type_index("Location") == 1);
  CHECK(s.type_index("Virus") == -1);
  CHECK_THROWS_AS((void)s.tag_index("B-Virus"), Error);
  CHECK_THROWS_AS((void)s.tag_index("D-Disease"), Error);
}

TEST_CASE("scheme construction rejects duplicates and empty names") {
  CHECK_THROWS_AS(TagScheme::of({"A", "A"}), Error);
  CHECK_THROWS_AS(TagScheme::of({"A", ""}), Error);
  CHECK(TagScheme::outbreak_news().types.size() == 10);
}

TEST_CASE("encode produces B at span starts and I inside") {
  TagScheme s = TagScheme::of({"Disease", "Location"});
  std::vector<EntitySpan> spans = {{1, 3, "Disease"}, {4, 5, "Location"}};
  std::vector<int> want = {0, 1, 2, 0, 3};
  CHECK(encode_bio(spans, 5, s) == want);
  std::vector<std::string> tags = encode_bio_tags(spans, 5, s);
  CHECK(tags == std::vector<std::string>{"O", "B-Disease", "I-Disease", "O",
                                         "B-Location"});
}

TEST_CASE("encode validates bounds and overlap") {
  TagScheme s = TagScheme::of({"Disease"});
  CHECK_THROWS_AS(encode_bio({{0, 0, "Disease"}}, 3, s), Error);
  CHECK_THROWS_AS(encode_bio({{2, 4, "Disease"}}, 3, s), Error);
  CHECK_THROWS_AS(encode_bio({{-1, 1, "Disease"}}, 3, s), Error);
  CHECK_THROWS_AS(encode_bio({{0, 2, "Disease"}, {1, 3, "Disease"}}, 3, s),
                  Error);
  CHECK_THROWS_AS(encode_bio({{0, 1, "Virus"}}, 3, s), Error);
}

TEST_CASE("adjacent same-type spans stay distinct through the codec") {
  TagScheme s = TagScheme::of({"Disease"});
  std::vector<EntitySpan> spans = {{0, 2, "Disease"}, {2, 3, "Disease"}};
  std::vector<int> labels = encode_bio(spans, 3, s);
  CHECK(labels == std::vector<int>{1, 2, 1});
  CHECK(decode_bio(labels, s) == spans);
}

TEST_CASE("decode starts a new span at a dangling I tag") {
  TagScheme s = TagScheme::of({"Disease", "Location"});
  // I-Disease with no preceding B-Disease acts as a begin.
  CHECK(decode_bio({2, 2, 0}, s) ==
        std::vector<EntitySpan>{{0, 2, "Disease"}});
  // Type switch inside a run splits the span.
  CHECK(decode_bio({1, 4, 0}, s) ==
        std::vector<EntitySpan>{{0, 1, "Disease"}, {1, 2, "Location"}});
  CHECK(decode_bio({0, 0, 0}, s).empty());
  CHECK(decode_bio({}, s).empty());
}

TEST_CASE("decode rejects out-of-range labels") {
  TagScheme s = TagScheme::of({"Disease"});
  CHECK_THROWS_AS(decode_bio({3}, s), Error);
  CHECK_THROWS_AS(decode_bio({-1}, s), Error);
}

TEST_CASE("decode of encode is the identity on random span lists") {
  TagScheme s = TagScheme::outbreak_news();
  Rng rng(11);
  for (int it = 0; it < 300; ++it) {
    int length = 1 + static_cast<int>(rng.uniform(24));
    std::vector<EntitySpan> spans = random_spans(rng, length, s);
    CHECK(decode_bio(encode_bio(spans, length, s), s) == spans);
  }
}

TEST_CASE("decode is total and always yields valid spans") {
  TagScheme s = TagScheme::of({"A", "B", "C"});
  Rng rng(12);
  for (int it = 0; it < 300; ++it) {
    int length = static_cast<int>(rng.uniform(20));
    std::vector<int> labels(length);
    for (int& l : labels)
      l = static_cast<int>(rng.uniform(s.label_count()));
    std::vector<EntitySpan> spans = decode_bio(labels, s);
    validate_spans(spans, length);  // bounds, non-empty, no overlap
    // Sorted by start and non-overlapping.
    for (size_t i = 1; i < spans.size(); ++i)
      CHECK(spans[i - 1].end <= spans[i].start);
  }
}

TEST_CASE("tag-string decode matches index decode") {
  TagScheme s = TagScheme::of({"Disease"});
  std::vector<std::string> tags = {"I-Disease", "I-Disease", "O", "B-Disease"};
  CHECK(decode_bio_tags(tags, s) ==
        std::vector<EntitySpan>{{0, 2, "Disease"}, {3, 4, "Disease"}});
}

TEST_CASE("spans_of selects the requested slot") {
  Sentence s;
  s.tokens = {"a", "b"};
  s.gold_spans = std::vector<EntitySpan>{{0, 1, "X"}};
  CHECK(spans_of(s, LabelSource::gold) != nullptr);
  CHECK(spans_of(s, LabelSource::weak) == nullptr);
  s.weak_spans = std::vector<EntitySpan>{};
  REQUIRE(spans_of(s, LabelSource::weak) != nullptr);
  CHECK(spans_of(s, LabelSource::weak)->empty());
  *mutable_spans_of(s, LabelSource::weak) = {{1, 2, "Y"}};
  CHECK(spans_of(s, LabelSource::weak)->size() == 1);
}

TEST_CASE("sentence text joins tokens with single spaces") {
  Sentence s;
  s.tokens = {"An", "outbreak", "."};
  CHECK(s.text() == "An outbreak .");
  CHECK(Sentence{}.text() == "");
}

TEST_CASE("validate_sentence rejects foreign types and bad spans") {
  TagScheme scheme = TagScheme::of({"Disease"});
  Sentence s;
  s.tokens = {"a", "b", "c"};
  s.gold_spans = std::vector<EntitySpan>{{0, 2, "Disease"}};
  CHECK_NOTHROW(validate_sentence(s, scheme));
  s.weak_spans = std::vector<EntitySpan>{{0, 1, "Virus"}};
  CHECK_THROWS_AS(validate_sentence(s, scheme), Error);
  s.weak_spans = std::vector<EntitySpan>{{2, 5, "Disease"}};
  CHECK_THROWS_AS(validate_sentence(s, scheme), Error);
}

TEST_CASE("enum string round-trips") {
  CHECK(quality_from_string("strong") == Quality::strong);
  CHECK(quality_from_string("weak") == Quality::weak);
  CHECK(quality_from_string("unlabeled") == Quality::unlabeled);
  CHECK_THROWS_AS(quality_from_string("golden"), Error);
  CHECK(label_source_from_string("gold") == LabelSource::gold);
  CHECK(label_source_from_string("weak") == LabelSource::weak);
  CHECK_THROWS_AS(label_source_from_string(""), Error);
  CHECK(std::string(to_string(Quality::weak)) == "weak");
  CHECK(std::string(to_string(LabelSource::gold)) == "gold");
}

TEST_CASE("rng streams are deterministic and derivation is stable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.u64() == b.u64());
  Rng c(42);
  Rng d1 = c.derive(7);
  Rng c2(42);
  Rng d2 = c2.derive(7);
  CHECK(d1.u64() == d2.u64());
  // Different streams diverge.
  Rng e(42);
  CHECK(e.derive(7).u64() != e.derive(8).u64());
}

TEST_CASE("rng shuffle permutes deterministically") {
  std::vector<int> v1 = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> v2 = v1;
  Rng a(5), b(5);
  a.shuffle(v1);
  b.shuffle(v2);
  CHECK(v1 == v2);
  std::multiset<int> elems(v1.begin(), v1.end());
  CHECK(elems == std::multiset<int>{1, 2, 3, 4, 5, 6, 7, 8});
}
