// wsner/core.hpp
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

#ifndef WSNER_CORE_HPP_
#define WSNER_CORE_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsner {

// All recoverable failures (validation, IO, config) throw this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The 10-type entity ontology used by the outbreak-news corpora.
const std::vector<std::string>& outbreak_entity_types();

// An ordered set of entity type names together with its BIO label space.
// Label indices: O == 0, B-types[k] == 2k+1, I-types[k] == 2k+2.
struct TagScheme {
  std::vector<std::string> types;

  static TagScheme outbreak_news();
  static TagScheme of(std::vector<std::string> type_names);

  int label_count() const { return static_cast<int>(2 * types.size() + 1); }
  int b_label(int type_idx) const { return 2 * type_idx + 1; }
  int i_label(int type_idx) const { return 2 * type_idx + 2; }

  bool has_type(const std::string& name) const { return type_index(name) >= 0; }
  int type_index(const std::string& name) const;  // -1 if absent

  // Tag string <-> label index. tag_index throws on unknown tags.
  int tag_index(const std::string& tag) const;
  std::string tag_name(int label) const;

  bool operator==(const TagScheme&) const = default;
};

// Token-level span, end exclusive.
struct EntitySpan {
  int start = 0;
  int end = 0;
  std::string etype;

  int length() const { return end - start; }
  bool operator==(const EntitySpan&) const = default;
  bool operator<(const EntitySpan& o) const {
    if (start != o.start) return start < o.start;
    if (end != o.end) return end < o.end;
    return etype < o.etype;
  }
};

struct Sentence {
  std::vector<std::string> tokens;
  std::optional<std::vector<EntitySpan>> gold_spans;
  std::optional<std::vector<EntitySpan>> weak_spans;
  std::optional<std::string> origin_language;

  int length() const { return static_cast<int>(tokens.size()); }
  // Tokens joined by single spaces.
  std::string text() const;
};

enum class Quality { strong, weak, unlabeled };
enum class LabelSource { gold, weak };

const char* to_string(Quality q);
const char* to_string(LabelSource s);
Quality quality_from_string(const std::string& s);
LabelSource label_source_from_string(const std::string& s);

// The selected span list, or nullptr when that source is absent.
const std::vector<EntitySpan>* spans_of(const Sentence& s, LabelSource source);
std::vector<EntitySpan>* mutable_spans_of(Sentence& s, LabelSource source);

struct Corpus {
  std::vector<Sentence> sentences;
  TagScheme scheme;
  Quality quality = Quality::unlabeled;
  std::string domain_tag;

  size_t size() const { return sentences.size(); }
};

// Throws Error naming the first offending span if any span is out of
// [0, length) bounds, empty, or overlaps another. `what` names the span
// list in the message (e.g. "gold_spans").
void validate_spans(const std::vector<EntitySpan>& spans, int length,
                    const std::string& what = "spans");

// Checks bounds/overlap of every stored span list and that every span type
// belongs to `scheme`.
void validate_sentence(const Sentence& s, const TagScheme& scheme,
                       const std::string& what = "sentence");
void validate_corpus(const Corpus& c);

// BIO codec. encode_bio validates its input; decode_bio is total over
// in-scheme label sequences: an I-X without a preceding B-X/I-X of the same
// type starts a new span (repair-as-B convention, see README).
std::vector<int> encode_bio(const std::vector<EntitySpan>& spans, int length,
                            const TagScheme& scheme);
std::vector<EntitySpan> decode_bio(const std::vector<int>& labels,
                                   const TagScheme& scheme);

// Tag-string variants used by file IO and tests.
std::vector<std::string> encode_bio_tags(const std::vector<EntitySpan>& spans,
                                         int length, const TagScheme& scheme);
std::vector<EntitySpan> decode_bio_tags(const std::vector<std::string>& tags,
                                        const TagScheme& scheme);

}  // namespace wsner

#endif  // WSNER_CORE_HPP_
