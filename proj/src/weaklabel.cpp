// wsner/weaklabel.cpp
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

#include "wsner/weaklabel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wsner/rng.hpp"

namespace wsner {

using json = nlohmann::json;

namespace {

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string lower_ascii(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw Error(path + ": bad JSON: " + e.what());
  }
}

Gazetteers gazetteers_from_json(const json& obj, const std::string& where) {
  Gazetteers out;
  if (!obj.is_object()) throw Error(where + ": gazetteers must be an object");
  for (const auto& [etype, phrases] : obj.items()) {
    for (const auto& p : phrases) {
      auto toks = split_tokens(p.get<std::string>());
      if (toks.empty())
        throw Error(where + ": empty gazetteer phrase for type '" + etype + "'");
      out[etype].push_back(std::move(toks));
    }
  }
  return out;
}

}  // namespace

Gazetteers read_gazetteers(const std::string& path) {
  json j = load_json_file(path);
  if (j.is_object() && j.contains("gazetteers"))
    return gazetteers_from_json(j["gazetteers"], path);
  return gazetteers_from_json(j, path);
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

Rule make_phrase_rule(const std::string& phrase, const std::string& etype,
                      int priority, bool case_sensitive) {
  Rule r;
  r.name = phrase;
  r.phrase = split_tokens(phrase);
  if (r.phrase.empty()) throw Error("rule '" + phrase + "': empty phrase");
  r.etype = etype;
  r.priority = priority;
  r.case_sensitive = case_sensitive;
  return r;
}

Rule make_pattern_rule(const std::string& pattern, const std::string& etype,
                       int priority, bool case_sensitive) {
  Rule r;
  r.name = pattern;
  r.pattern = pattern;
  r.etype = etype;
  r.priority = priority;
  r.case_sensitive = case_sensitive;
  auto pieces = split_tokens(pattern);
  if (pieces.empty()) throw Error("rule '" + pattern + "': empty pattern");
  auto flags = std::regex::ECMAScript;
  if (!case_sensitive) flags |= std::regex::icase;
  for (const auto& piece : pieces) {
    try {
      r.pattern_res.emplace_back(piece, flags);
    } catch (const std::regex_error& e) {
      throw Error("rule '" + pattern + "': bad regex piece '" + piece +
                  "': " + e.what());
    }
  }
  return r;
}

std::vector<Rule> read_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rule file '" + path + "'");
  std::vector<Rule> rules;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw Error(path + " line " + std::to_string(line_no) + ": bad JSON: " +
                  e.what());
    }
    if (!j.contains("type"))
      throw Error(path + " line " + std::to_string(line_no) + ": missing 'type'");
    std::string etype = j["type"].get<std::string>();
    int priority = j.value("priority", 0);
    bool cs = j.value("case_sensitive", true);
    if (j.contains("phrase"))
      rules.push_back(make_phrase_rule(j["phrase"].get<std::string>(), etype,
                                       priority, cs));
    else if (j.contains("pattern"))
      rules.push_back(make_pattern_rule(j["pattern"].get<std::string>(), etype,
                                        priority, cs));
    else
      throw Error(path + " line " + std::to_string(line_no) +
                  ": rule needs 'phrase' or 'pattern'");
  }
  return rules;
}

void validate_rules(const std::vector<Rule>& rules, const TagScheme& scheme) {
  for (const Rule& r : rules)
    if (!scheme.has_type(r.etype))
      throw Error("rule '" + r.name + "': unknown entity type '" + r.etype + "'");
}

namespace {

bool rule_matches_at(const Rule& r, const Sentence& s, size_t start) {
  size_t len = r.match_length();
  if (start + len > s.tokens.size()) return false;
  if (!r.phrase.empty()) {
    for (size_t i = 0; i < len; ++i) {
      const std::string& tok = s.tokens[start + i];
      const std::string& want = r.phrase[i];
      if (r.case_sensitive ? tok != want
                           : lower_ascii(tok) != lower_ascii(want))
        return false;
    }
    return true;
  }
  for (size_t i = 0; i < len; ++i)
    if (!std::regex_match(s.tokens[start + i], r.pattern_res[i])) return false;
  return true;
}

struct Candidate {
  int start;
  int len;
  int priority;
  std::string etype;
};

}  // namespace

std::vector<EntitySpan> apply_rules(const Sentence& sentence,
                                    const std::vector<Rule>& rules) {
  std::vector<Candidate> candidates;
  for (const Rule& r : rules) {
    size_t len = r.match_length();
    if (len == 0 || len > sentence.tokens.size()) continue;
    for (size_t start = 0; start + len <= sentence.tokens.size(); ++start)
      if (rule_matches_at(r, sentence, start))
        candidates.push_back({static_cast<int>(start), static_cast<int>(len),
                              r.priority, r.etype});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.len != b.len) return a.len > b.len;
              if (a.priority != b.priority) return a.priority > b.priority;
              if (a.start != b.start) return a.start < b.start;
              return a.etype < b.etype;
            });
  std::vector<bool> taken(sentence.tokens.size(), false);
  std::vector<EntitySpan> spans;
  for (const Candidate& c : candidates) {
    bool free = true;
    for (int i = c.start; i < c.start + c.len; ++i)
      if (taken[i]) { free = false; break; }
    if (!free) continue;
    for (int i = c.start; i < c.start + c.len; ++i) taken[i] = true;
    spans.push_back({c.start, c.start + c.len, c.etype});
  }
  std::sort(spans.begin(), spans.end());
  return spans;
}

Corpus weak_label_corpus(const Corpus& corpus, const std::vector<Rule>& rules) {
  validate_rules(rules, corpus.scheme);
  Corpus out = corpus;
  for (Sentence& s : out.sentences) s.weak_spans = apply_rules(s, rules);
  out.quality = Quality::weak;
  return out;
}

// ---------------------------------------------------------------------------
// Gold corruption
// ---------------------------------------------------------------------------

void NoiseProfile::validate(const TagScheme& scheme) const {
  auto check01 = [](double v, const char* name) {
    if (v < 0.0 || v > 1.0)
      throw Error(std::string("NoiseProfile: ") + name + " must be in [0,1]");
  };
  check01(miss_rate, "miss_rate");
  check01(truncate_rate, "truncate_rate");
  for (const auto& [etype, row] : confusion) {
    if (!scheme.has_type(etype))
      throw Error("NoiseProfile: confusion row for unknown type '" + etype + "'");
    double sum = 0.0;
    for (const auto& [target, p] : row) {
      if (!scheme.has_type(target))
        throw Error("NoiseProfile: confusion target unknown type '" + target + "'");
      check01(p, "confusion entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error("NoiseProfile: confusion row '" + etype +
                  "' sums to " + std::to_string(sum) + ", expected 1");
  }
}

NoiseProfile read_noise_profile(const std::string& path) {
  json j = load_json_file(path);
  NoiseProfile p;
  for (const auto& [key, val] : j.items()) {
    if (key == "miss_rate") p.miss_rate = val.get<double>();
    else if (key == "truncate_rate") p.truncate_rate = val.get<double>();
    else if (key == "seed") p.seed = val.get<uint64_t>();
    else if (key == "confusion") {
      for (const auto& [etype, row] : val.items())
        for (const auto& [target, prob] : row.items())
          p.confusion[etype][target] = prob.get<double>();
    } else {
      throw Error(path + ": unknown NoiseProfile key '" + key + "'");
    }
  }
  return p;
}

Corpus corrupt_gold(const Corpus& corpus, const NoiseProfile& profile) {
  profile.validate(corpus.scheme);
  Corpus out = corpus;
  out.quality = Quality::weak;
  Rng root(profile.seed);
  for (size_t i = 0; i < out.sentences.size(); ++i) {
    Sentence& s = out.sentences[i];
    if (!s.gold_spans)
      throw Error("sentence " + std::to_string(i) + ": missing gold labels");
    Rng rng = root.derive(i);
    std::vector<EntitySpan> weak;
    for (const EntitySpan& gold : *s.gold_spans) {
      if (rng.bernoulli(profile.miss_rate)) continue;
      EntitySpan span = gold;
      if (span.length() > 1 && rng.bernoulli(profile.truncate_rate)) {
        int new_len = 1 + static_cast<int>(rng.uniform(span.length() - 1));
        span.end = span.start + new_len;
      } else {
        auto row = profile.confusion.find(span.etype);
        if (row != profile.confusion.end()) {
          double u = rng.real01();
          double acc = 0.0;
          for (const auto& [target, prob] : row->second) {
            acc += prob;
            if (u < acc) { span.etype = target; break; }
          }
          // row sums to 1 within 1e-9; numerical slack falls through to
          // the last key
          if (u >= acc && !row->second.empty())
            span.etype = row->second.rbegin()->first;
        }
      }
      weak.push_back(span);
    }
    s.weak_spans = std::move(weak);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

SynthSpec read_synth_spec(const std::string& path) {
  json j = load_json_file(path);
  SynthSpec spec;
  for (const auto& [key, val] : j.items()) {
    if (key == "sentence_count") spec.sentence_count = val.get<long>();
    else if (key == "target_entities_per_entry")
      spec.target_entities_per_entry = val.get<double>();
    else if (key == "seed") spec.seed = val.get<uint64_t>();
    else if (key == "templates") {
      for (const auto& t : val) {
        if (t.is_string()) spec.templates.push_back(split_tokens(t.get<std::string>()));
        else {
          std::vector<std::string> toks;
          for (const auto& tok : t) toks.push_back(tok.get<std::string>());
          spec.templates.push_back(std::move(toks));
        }
      }
    } else if (key == "gazetteers") {
      spec.gazetteers = gazetteers_from_json(val, path);
    } else {
      throw Error(path + ": unknown SynthSpec key '" + key + "'");
    }
  }
  return spec;
}

namespace {

bool is_slot(const std::string& token, std::string* etype) {
  if (token.size() > 2 && token.front() == '<' && token.back() == '>') {
    *etype = token.substr(1, token.size() - 2);
    return true;
  }
  return false;
}

int slot_count(const std::vector<std::string>& tmpl) {
  int n = 0;
  std::string etype;
  for (const auto& tok : tmpl)
    if (is_slot(tok, &etype)) ++n;
  return n;
}

}  // namespace

Corpus generate_synthetic(const SynthSpec& spec, const TagScheme& scheme) {
  if (spec.sentence_count < 0) throw Error("SynthSpec: negative sentence_count");
  if (spec.templates.empty() && spec.sentence_count > 0)
    throw Error("SynthSpec: no templates");

  // Validate slot/gazetteer pairing up front.
  std::map<int, std::vector<size_t>> by_slot_count;
  for (size_t t = 0; t < spec.templates.size(); ++t) {
    std::string etype;
    for (const auto& tok : spec.templates[t]) {
      if (!is_slot(tok, &etype)) continue;
      if (!scheme.has_type(etype))
        throw Error("SynthSpec: template slot type '" + etype +
                    "' not in scheme");
      auto g = spec.gazetteers.find(etype);
      if (g == spec.gazetteers.end() || g->second.empty())
        throw Error("SynthSpec: no gazetteer phrases for slot type '" + etype +
                    "'");
    }
    by_slot_count[slot_count(spec.templates[t])].push_back(t);
  }

  Corpus corpus;
  corpus.scheme = scheme;
  corpus.quality = Quality::strong;
  corpus.domain_tag = "synthetic";

  Rng root(spec.seed);
  const double target = spec.target_entities_per_entry;
  const int lo = static_cast<int>(std::floor(target));
  const double p_hi = target - lo;

  for (long i = 0; i < spec.sentence_count; ++i) {
    Rng rng = root.derive(static_cast<uint64_t>(i));
    int want = lo + (rng.bernoulli(p_hi) ? 1 : 0);
    // Nearest available slot count; prefer the smaller on ties.
    auto it = by_slot_count.find(want);
    if (it == by_slot_count.end()) {
      int best = -1;
      for (const auto& [count, idxs] : by_slot_count) {
        (void)idxs;
        if (best < 0 || std::abs(count - want) < std::abs(best - want))
          best = count;
      }
      it = by_slot_count.find(best);
    }
    const auto& tmpl =
        spec.templates[it->second[rng.uniform(it->second.size())]];

    Sentence s;
    std::vector<EntitySpan> spans;
    std::string etype;
    for (const auto& tok : tmpl) {
      if (is_slot(tok, &etype)) {
        const auto& phrases = spec.gazetteers.at(etype);
        const auto& phrase = phrases[rng.uniform(phrases.size())];
        int start = s.length();
        for (const auto& w : phrase) s.tokens.push_back(w);
        spans.push_back({start, s.length(), etype});
      } else {
        s.tokens.push_back(tok);
      }
    }
    s.gold_spans = std::move(spans);
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace wsner
