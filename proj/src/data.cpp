// wsner/data.cpp
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

#include "wsner/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "wsner/rng.hpp"

namespace wsner {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

CorpusFormat format_from_string(const std::string& s) {
  if (s == "bio-columns" || s == "bio") return CorpusFormat::bio_columns;
  if (s == "json-lines" || s == "jsonl") return CorpusFormat::json_lines;
  throw Error("unknown corpus format '" + s + "' (expected bio-columns|json-lines)");
}

CorpusFormat format_from_path(const std::string& path) {
  auto ext = fs::path(path).extension().string();
  if (ext == ".jsonl" || ext == ".json") return CorpusFormat::json_lines;
  return CorpusFormat::bio_columns;
}

namespace {

void infer_quality(Corpus& c) {
  bool any_gold = false, any_weak = false;
  for (const auto& s : c.sentences) {
    any_gold = any_gold || s.gold_spans.has_value();
    any_weak = any_weak || s.weak_spans.has_value();
  }
  c.quality = any_gold ? Quality::strong
                       : (any_weak ? Quality::weak : Quality::unlabeled);
}

Corpus parse_bio_columns(const std::string& content, const TagScheme& scheme,
                         LabelSource slot) {
  Corpus corpus;
  corpus.scheme = scheme;
  std::vector<std::string> tokens, tags;
  long line_no = 0;

  auto flush = [&]() {
    if (tokens.empty()) return;
    Sentence s;
    s.tokens = std::move(tokens);
    std::vector<EntitySpan> spans;
    try {
      spans = decode_bio_tags(tags, scheme);
    } catch (const Error& e) {
      throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
    *(slot == LabelSource::gold ? &s.gold_spans : &s.weak_spans) = std::move(spans);
    corpus.sentences.push_back(std::move(s));
    tokens.clear();
    tags.clear();
  };

  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size() ||
        line.find(' ', sp + 1) != std::string::npos)
      throw Error("line " + std::to_string(line_no) +
                  ": expected 'token tag', got '" + line + "'");
    tokens.push_back(line.substr(0, sp));
    try {
      scheme.tag_index(line.substr(sp + 1));  // validate early, per line
    } catch (const Error& e) {
      throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
    tags.push_back(line.substr(sp + 1));
  }
  flush();
  infer_quality(corpus);
  return corpus;
}

std::vector<EntitySpan> spans_from_json(const ordered_json& arr,
                                        const TagScheme& scheme, int length,
                                        long line_no, const char* key) {
  std::vector<EntitySpan> spans;
  for (const auto& item : arr) {
    if (!item.is_array() || item.size() != 3)
      throw Error("line " + std::to_string(line_no) + ": " + key +
                  " entries must be [start, end, type]");
    EntitySpan s{item[0].get<int>(), item[1].get<int>(),
                 item[2].get<std::string>()};
    if (!scheme.has_type(s.etype))
      throw Error("line " + std::to_string(line_no) + ": unknown entity type '" +
                  s.etype + "'");
    spans.push_back(std::move(s));
  }
  validate_spans(spans, length, "line " + std::to_string(line_no) + " " + key);
  return spans;
}

Corpus parse_json_lines(const std::string& content, const TagScheme& scheme) {
  Corpus corpus;
  corpus.scheme = scheme;
  std::istringstream in(content);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw Error("line " + std::to_string(line_no) + ": bad JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("tokens"))
      throw Error("line " + std::to_string(line_no) + ": expected object with 'tokens'");
    Sentence s;
    for (const auto& t : j["tokens"]) s.tokens.push_back(t.get<std::string>());
    if (j.contains("gold_spans"))
      s.gold_spans = spans_from_json(j["gold_spans"], scheme, s.length(),
                                     line_no, "gold_spans");
    if (j.contains("weak_spans"))
      s.weak_spans = spans_from_json(j["weak_spans"], scheme, s.length(),
                                     line_no, "weak_spans");
    if (j.contains("origin_language"))
      s.origin_language = j["origin_language"].get<std::string>();
    corpus.sentences.push_back(std::move(s));
  }
  infer_quality(corpus);
  return corpus;
}

std::string serialize_bio_columns(const Corpus& corpus, LabelSource slot) {
  std::string out;
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    const Sentence& s = corpus.sentences[i];
    const auto* spans = spans_of(s, slot);
    if (!spans)
      throw Error("sentence " + std::to_string(i) + ": missing " +
                  to_string(slot) + " labels for bio-columns output");
    auto tags = encode_bio_tags(*spans, s.length(), corpus.scheme);
    for (int t = 0; t < s.length(); ++t) {
      out += s.tokens[t];
      out += ' ';
      out += tags[t];
      out += '\n';
    }
    if (i + 1 < corpus.sentences.size()) out += '\n';
  }
  return out;
}

std::string serialize_json_lines(const Corpus& corpus) {
  std::string out;
  for (const Sentence& s : corpus.sentences) {
    ordered_json j;
    j["tokens"] = s.tokens;
    auto put_spans = [&](const char* key, const std::vector<EntitySpan>& spans) {
      ordered_json arr = ordered_json::array();
      for (const auto& sp : spans)
        arr.push_back(ordered_json::array({sp.start, sp.end, sp.etype}));
      j[key] = std::move(arr);
    };
    if (s.gold_spans) put_spans("gold_spans", *s.gold_spans);
    if (s.weak_spans) put_spans("weak_spans", *s.weak_spans);
    if (s.origin_language) j["origin_language"] = *s.origin_language;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

Corpus parse_corpus(const std::string& content, CorpusFormat format,
                    const TagScheme& scheme, LabelSource bio_slot) {
  return format == CorpusFormat::bio_columns
             ? parse_bio_columns(content, scheme, bio_slot)
             : parse_json_lines(content, scheme);
}

std::string serialize_corpus(const Corpus& corpus, CorpusFormat format,
                             LabelSource bio_slot) {
  return format == CorpusFormat::bio_columns
             ? serialize_bio_columns(corpus, bio_slot)
             : serialize_json_lines(corpus);
}

Corpus read_corpus(const std::string& path, CorpusFormat format,
                   const TagScheme& scheme, LabelSource bio_slot) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_corpus(buf.str(), format, scheme, bio_slot);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void atomic_write_file(const std::string& path, const std::string& content) {
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void write_corpus(const Corpus& corpus, const std::string& path,
                  CorpusFormat format, LabelSource bio_slot) {
  atomic_write_file(path, serialize_corpus(corpus, format, bio_slot));
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

void FilterConfig::validate() const {
  if (min_words < 1) throw Error("FilterConfig: min_words must be >= 1");
  if (min_chars >= max_chars)
    throw Error("FilterConfig: min_chars must be < max_chars");
}

namespace {

// Trim plus collapse of internal whitespace runs to single spaces.
std::string canonical_text(const Sentence& s) {
  std::string joined = s.text();
  std::string out;
  bool in_ws = true;  // leading whitespace dropped
  for (char c : joined) {
    bool ws = c == ' ' || c == '\t';
    if (ws) {
      if (!in_ws) out += ' ';
      in_ws = true;
    } else {
      out += c;
      in_ws = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

bool all_printable_ascii(const std::string& text) {
  for (unsigned char c : text)
    if (c < 0x20 || c > 0x7E) return false;
  return true;
}

}  // namespace

FilterResult filter_corpus(const Corpus& corpus, const FilterConfig& config) {
  config.validate();
  FilterResult result;
  result.kept.scheme = corpus.scheme;
  result.kept.quality = corpus.quality;
  result.kept.domain_tag = corpus.domain_tag;

  std::unordered_set<std::string> seen;
  for (const Sentence& s : corpus.sentences) {
    std::string text = s.text();
    long chars = static_cast<long>(text.size());
    if (s.length() < config.min_words) {
      ++result.report.rejected_length_words;
    } else if (chars < config.min_chars) {
      ++result.report.rejected_length_chars_min;
    } else if (chars > config.max_chars) {
      ++result.report.rejected_length_chars_max;
    } else if (config.reject_non_ascii && !all_printable_ascii(text)) {
      ++result.report.rejected_non_ascii;
    } else if (config.dedupe && seen.count(canonical_text(s))) {
      ++result.report.rejected_duplicate;
    } else if (config.quality_predicate && !config.quality_predicate(s)) {
      ++result.report.rejected_predicate;
    } else {
      if (config.dedupe) seen.insert(canonical_text(s));
      result.kept.sentences.push_back(s);
      ++result.report.kept;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

namespace {

const std::vector<EntitySpan>& require_spans(const Sentence& s,
                                             LabelSource source, size_t idx) {
  const auto* spans = spans_of(s, source);
  if (!spans)
    throw Error("sentence " + std::to_string(idx) + ": missing " +
                to_string(source) + " labels");
  return *spans;
}

}  // namespace

CorpusStats corpus_stats(const Corpus& corpus, LabelSource source) {
  CorpusStats st;
  st.total_entries = static_cast<long>(corpus.sentences.size());
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    const Sentence& s = corpus.sentences[i];
    st.total_words += s.length();
    for (const auto& sp : require_spans(s, source, i)) {
      st.total_labelled_words += sp.length();
      ++st.total_entities;
    }
  }
  if (st.total_entities > 0)
    st.mean_entity_length =
        static_cast<double>(st.total_labelled_words) / st.total_entities;
  if (st.total_words > 0)
    st.percent_labelled_words =
        100.0 * st.total_labelled_words / st.total_words;
  if (st.total_entries > 0)
    st.mean_entities_per_entry =
        static_cast<double>(st.total_entities) / st.total_entries;
  return st;
}

std::map<std::string, long> entity_counts(const Corpus& corpus,
                                          LabelSource source) {
  std::map<std::string, long> counts;
  for (const auto& t : corpus.scheme.types) counts[t] = 0;
  for (size_t i = 0; i < corpus.sentences.size(); ++i)
    for (const auto& sp : require_spans(corpus.sentences[i], source, i))
      ++counts[sp.etype];
  return counts;
}

namespace {

std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, v);
  return buf;
}

}  // namespace

std::string stats_table(const CorpusStats& s) {
  std::vector<std::pair<std::string, std::string>> rows = {
      {"Total Entries (Sentences)", std::to_string(s.total_entries)},
      {"Total Words", std::to_string(s.total_words)},
      {"Total Labelled Words", std::to_string(s.total_labelled_words)},
      {"Total Entities", std::to_string(s.total_entities)},
      {"Mean Entity Length", fixed(s.mean_entity_length, 2)},
      {"Percent Labelled Words", fixed(s.percent_labelled_words, 1) + "%"},
      {"Mean Entities Per Entry", fixed(s.mean_entities_per_entry, 2)},
  };
  size_t w = 0;
  for (const auto& [k, v] : rows) w = std::max(w, k.size());
  std::string out;
  for (const auto& [k, v] : rows) {
    out += k;
    out.append(w - k.size() + 2, ' ');
    out += v;
    out += '\n';
  }
  return out;
}

std::string stats_csv(const CorpusStats& s) {
  std::string out = "Metric,Value\n";
  out += "Total Entries (Sentences)," + std::to_string(s.total_entries) + "\n";
  out += "Total Words," + std::to_string(s.total_words) + "\n";
  out += "Total Labelled Words," + std::to_string(s.total_labelled_words) + "\n";
  out += "Total Entities," + std::to_string(s.total_entities) + "\n";
  out += "Mean Entity Length," + fixed(s.mean_entity_length, 4) + "\n";
  out += "Percent Labelled Words," + fixed(s.percent_labelled_words, 2) + "\n";
  out += "Mean Entities Per Entry," + fixed(s.mean_entities_per_entry, 4) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo split
// ---------------------------------------------------------------------------

SplitSpec SplitSpec::default_sizes(long n) {
  SplitSpec spec;
  spec.train = std::lround(0.7 * n);
  spec.validation = std::lround(0.1 * n);
  spec.test = n - spec.train - spec.validation;
  return spec;
}

namespace {

void validate_split_spec(const Corpus& corpus, const SplitSpec& spec) {
  if (spec.train < 0 || spec.validation < 0 || spec.test < 0)
    throw Error("split sizes must be non-negative");
  long total = spec.train + spec.validation + spec.test;
  if (total != static_cast<long>(corpus.size()))
    throw Error("split sizes sum to " + std::to_string(total) +
                " but corpus has " + std::to_string(corpus.size()) +
                " sentences");
  if (spec.iterations < 1) throw Error("split iterations must be >= 1");
}

// Partition index (0 train / 1 validation / 2 test) of position `pos` in the
// shuffled order.
int partition_of(size_t pos, const SplitSpec& spec) {
  if (pos < static_cast<size_t>(spec.train)) return 0;
  if (pos < static_cast<size_t>(spec.train + spec.validation)) return 1;
  return 2;
}

}  // namespace

std::vector<size_t> split_candidate_order(size_t n, uint64_t seed,
                                          long iteration) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng = Rng(seed).derive(static_cast<uint64_t>(iteration));
  rng.shuffle(order);
  return order;
}

double split_deviation_score(const Corpus& corpus, LabelSource source,
                             const std::vector<size_t>& order,
                             const SplitSpec& spec) {
  const size_t n = corpus.size();
  std::map<std::string, std::array<long, 3>> per_type;
  for (size_t pos = 0; pos < n; ++pos) {
    int part = partition_of(pos, spec);
    for (const auto& sp : require_spans(corpus.sentences[order[pos]], source,
                                        order[pos]))
      per_type[sp.etype][part] += 1;
  }
  const double frac[3] = {static_cast<double>(spec.train) / n,
                          static_cast<double>(spec.validation) / n,
                          static_cast<double>(spec.test) / n};
  double score = 0.0;
  for (const auto& [etype, counts] : per_type) {
    long total = counts[0] + counts[1] + counts[2];
    if (total == 0) continue;
    for (int p = 0; p < 3; ++p)
      score += std::abs(static_cast<double>(counts[p]) / total - frac[p]);
  }
  return score;
}

SplitResult monte_carlo_split(const Corpus& corpus, const SplitSpec& spec,
                              LabelSource source) {
  validate_split_spec(corpus, spec);
  const size_t n = corpus.size();

  double best_score = 0.0;
  long best_iter = -1;
  std::vector<size_t> best_order;
  for (long it = 0; it < spec.iterations; ++it) {
    auto order = split_candidate_order(n, spec.seed, it);
    double score = split_deviation_score(corpus, source, order, spec);
    if (best_iter < 0 || score < best_score) {
      best_score = score;
      best_iter = it;
      best_order = std::move(order);
    }
  }

  SplitResult result;
  result.best_score = best_score;
  result.best_iteration = best_iter;
  Corpus* parts[3] = {&result.train, &result.validation, &result.test};
  for (Corpus* c : parts) {
    c->scheme = corpus.scheme;
    c->quality = corpus.quality;
    c->domain_tag = corpus.domain_tag;
  }
  for (size_t pos = 0; pos < n; ++pos)
    parts[partition_of(pos, spec)]->sentences.push_back(
        corpus.sentences[best_order[pos]]);
  return result;
}

}  // namespace wsner
