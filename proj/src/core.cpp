// wsner/core.cpp
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

#include "wsner/core.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace wsner {

const std::vector<std::string>& outbreak_entity_types() {
  static const std::vector<std::string> kTypes = {
      "Animal",   "Bacterium", "Disease", "Location", "Organisation",
      "Person",   "Product",   "Symptom", "Time",     "Virus"};
  return kTypes;
}

TagScheme TagScheme::outbreak_news() { return TagScheme::of(outbreak_entity_types()); }

TagScheme TagScheme::of(std::vector<std::string> type_names) {
  std::set<std::string> seen;
  for (const auto& t : type_names) {
    if (t.empty()) throw Error("TagScheme: empty type name");
    if (!seen.insert(t).second)
      throw Error("TagScheme: duplicate type name '" + t + "'");
  }
  TagScheme s;
  s.types = std::move(type_names);
  return s;
}

int TagScheme::type_index(const std::string& name) const {
  for (size_t i = 0; i < types.size(); ++i)
    if (types[i] == name) return static_cast<int>(i);
  return -1;
}

int TagScheme::tag_index(const std::string& tag) const {
  if (tag == "O") return 0;
  if (tag.size() > 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I')) {
    int t = type_index(tag.substr(2));
    if (t >= 0) return tag[0] == 'B' ? b_label(t) : i_label(t);
  }
  throw Error("unknown tag '" + tag + "' for this scheme");
}

std::string TagScheme::tag_name(int label) const {
  if (label == 0) return "O";
  if (label < 0 || label >= label_count())
    throw Error("label index " + std::to_string(label) + " out of range");
  int t = (label - 1) / 2;
  return (label % 2 == 1 ? "B-" : "I-") + types[t];
}

std::string Sentence::text() const {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

const char* to_string(Quality q) {
  switch (q) {
    case Quality::strong: return "strong";
    case Quality::weak: return "weak";
    case Quality::unlabeled: return "unlabeled";
  }
  return "?";
}

const char* to_string(LabelSource s) {
  return s == LabelSource::gold ? "gold" : "weak";
}

Quality quality_from_string(const std::string& s) {
  if (s == "strong") return Quality::strong;
  if (s == "weak") return Quality::weak;
  if (s == "unlabeled") return Quality::unlabeled;
  throw Error("unknown quality '" + s + "' (expected strong|weak|unlabeled)");
}

LabelSource label_source_from_string(const std::string& s) {
  if (s == "gold") return LabelSource::gold;
  if (s == "weak") return LabelSource::weak;
  throw Error("unknown label source '" + s + "' (expected gold|weak)");
}

const std::vector<EntitySpan>* spans_of(const Sentence& s, LabelSource source) {
  const auto& slot = source == LabelSource::gold ? s.gold_spans : s.weak_spans;
  return slot ? &*slot : nullptr;
}

std::vector<EntitySpan>* mutable_spans_of(Sentence& s, LabelSource source) {
  auto& slot = source == LabelSource::gold ? s.gold_spans : s.weak_spans;
  return slot ? &*slot : nullptr;
}

namespace {

std::string span_repr(const EntitySpan& s) {
  std::ostringstream os;
  os << "(" << s.start << "," << s.end << "," << s.etype << ")";
  return os.str();
}

}  // namespace

void validate_spans(const std::vector<EntitySpan>& spans, int length,
                    const std::string& what) {
  std::vector<EntitySpan> sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    const EntitySpan& s = sorted[i];
    if (s.start < 0 || s.start >= s.end || s.end > length)
      throw Error(what + ": span " + span_repr(s) + " out of bounds for length " +
                  std::to_string(length));
    if (i > 0 && sorted[i - 1].end > s.start)
      throw Error(what + ": span " + span_repr(s) + " overlaps " +
                  span_repr(sorted[i - 1]));
  }
}

void validate_sentence(const Sentence& s, const TagScheme& scheme,
                       const std::string& what) {
  for (LabelSource src : {LabelSource::gold, LabelSource::weak}) {
    const auto* spans = spans_of(s, src);
    if (!spans) continue;
    std::string slot = std::string(to_string(src)) + "_spans";
    validate_spans(*spans, s.length(), what + " " + slot);
    for (const auto& sp : *spans)
      if (!scheme.has_type(sp.etype))
        throw Error(what + " " + slot + ": unknown entity type '" + sp.etype + "'");
  }
}

void validate_corpus(const Corpus& c) {
  for (size_t i = 0; i < c.sentences.size(); ++i)
    validate_sentence(c.sentences[i], c.scheme,
                      "sentence " + std::to_string(i));
}

std::vector<int> encode_bio(const std::vector<EntitySpan>& spans, int length,
                            const TagScheme& scheme) {
  validate_spans(spans, length);
  std::vector<int> labels(length, 0);
  for (const auto& s : spans) {
    int t = scheme.type_index(s.etype);
    if (t < 0) throw Error("encode_bio: unknown entity type '" + s.etype + "'");
    labels[s.start] = scheme.b_label(t);
    for (int i = s.start + 1; i < s.end; ++i) labels[i] = scheme.i_label(t);
  }
  return labels;
}

std::vector<EntitySpan> decode_bio(const std::vector<int>& labels,
                                   const TagScheme& scheme) {
  std::vector<EntitySpan> spans;
  int open_start = -1;
  int open_type = -1;
  auto close = [&](int end) {
    if (open_start >= 0)
      spans.push_back({open_start, end, scheme.types[open_type]});
    open_start = -1;
    open_type = -1;
  };
  for (size_t i = 0; i < labels.size(); ++i) {
    int lab = labels[i];
    if (lab < 0 || lab >= scheme.label_count())
      throw Error("decode_bio: label index " + std::to_string(lab) +
                  " out of range at position " + std::to_string(i));
    if (lab == 0) {
      close(static_cast<int>(i));
      continue;
    }
    int t = (lab - 1) / 2;
    bool is_b = lab % 2 == 1;
    if (!is_b && open_type == t) continue;  // I-X continuing an open X span
    // B-X, or an I-X that does not continue the open span: start fresh.
    close(static_cast<int>(i));
    open_start = static_cast<int>(i);
    open_type = t;
  }
  close(static_cast<int>(labels.size()));
  return spans;
}

std::vector<std::string> encode_bio_tags(const std::vector<EntitySpan>& spans,
                                         int length, const TagScheme& scheme) {
  std::vector<int> labels = encode_bio(spans, length, scheme);
  std::vector<std::string> tags(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) tags[i] = scheme.tag_name(labels[i]);
  return tags;
}

std::vector<EntitySpan> decode_bio_tags(const std::vector<std::string>& tags,
                                        const TagScheme& scheme) {
  std::vector<int> labels(tags.size());
  for (size_t i = 0; i < tags.size(); ++i) labels[i] = scheme.tag_index(tags[i]);
  return decode_bio(labels, scheme);
}

}  // namespace wsner
