// wsner/weaklabel.hpp
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

#ifndef WSNER_WEAKLABEL_HPP_
#define WSNER_WEAKLABEL_HPP_

#include <cstdint>
#include <map>
#include <regex>
#include <string>
#include <vector>

#include "wsner/core.hpp"

namespace wsner {

// Per-type phrase lists (phrases pre-tokenized). Shared by the synthetic
// generator and the augmentation step.
using Gazetteers = std::map<std::string, std::vector<std::vector<std::string>>>;

// Reads either a bare {"Type": ["phrase", ...]} object or a synthesis spec
// file (its "gazetteers" field). Phrases are split on spaces.
Gazetteers read_gazetteers(const std::string& path);

// ---------------------------------------------------------------------------
// Rule-based weak labeling
// ---------------------------------------------------------------------------

// Either a literal gazetteer phrase or a sequence of per-token regular
// expressions (pattern split on spaces, each piece full-matched against one
// token).
struct Rule {
  std::string name;                     // for error messages
  std::vector<std::string> phrase;      // literal matcher (empty if pattern rule)
  std::string pattern;                  // source text of the pattern matcher
  std::vector<std::regex> pattern_res;  // compiled, one per token
  std::string etype;
  int priority = 0;
  bool case_sensitive = true;

  size_t match_length() const {
    return phrase.empty() ? pattern_res.size() : phrase.size();
  }
};

Rule make_phrase_rule(const std::string& phrase, const std::string& etype,
                      int priority = 0, bool case_sensitive = true);
// Throws Error naming the rule if any regex piece fails to compile.
Rule make_pattern_rule(const std::string& pattern, const std::string& etype,
                       int priority = 0, bool case_sensitive = true);

// json-lines, one object per rule: {"phrase"|"pattern", "type",
// "priority"?, "case_sensitive"?}.
std::vector<Rule> read_rules(const std::string& path);
void validate_rules(const std::vector<Rule>& rules, const TagScheme& scheme);

// All matches of all rules, overlaps resolved by longest match first, then
// higher priority, then leftmost start (then type name, so the result is
// independent of rule list order).
std::vector<EntitySpan> apply_rules(const Sentence& sentence,
                                    const std::vector<Rule>& rules);

// apply_rules over every sentence; matches land in weak_spans.
Corpus weak_label_corpus(const Corpus& corpus, const std::vector<Rule>& rules);

// ---------------------------------------------------------------------------
// Controlled gold-label corruption
// ---------------------------------------------------------------------------

// Per-span corruption chain: drop with miss_rate; else (multi-token spans
// only) truncate trailing tokens with truncate_rate; else redraw the type
// from the confusion row. Types without a confusion row keep their type.
struct NoiseProfile {
  double miss_rate = 0.0;
  double truncate_rate = 0.0;
  std::map<std::string, std::map<std::string, double>> confusion;
  uint64_t seed = 0;

  void validate(const TagScheme& scheme) const;
};

NoiseProfile read_noise_profile(const std::string& path);

// Gold spans pass through untouched; the corrupted copies land in
// weak_spans. Deterministic given profile.seed, and per-sentence RNG streams
// make the result independent of processing order.
Corpus corrupt_gold(const Corpus& corpus, const NoiseProfile& profile);

// ---------------------------------------------------------------------------
// Synthetic corpus generation
// ---------------------------------------------------------------------------

struct SynthSpec {
  long sentence_count = 0;
  // Template tokens; "<Type>" marks a typed slot.
  std::vector<std::vector<std::string>> templates;
  Gazetteers gazetteers;
  double target_entities_per_entry = 2.0;
  uint64_t seed = 0;
};

SynthSpec read_synth_spec(const std::string& path);

// Gold-labeled corpus of spec.sentence_count sentences. Per-sentence slot
// counts are drawn as a floor/ceil mix of the target mean, so the realized
// entities-per-entry lands within a few percent of it.
Corpus generate_synthetic(const SynthSpec& spec, const TagScheme& scheme);

}  // namespace wsner

#endif  // WSNER_WEAKLABEL_HPP_
