// wsner/data.hpp
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

#ifndef WSNER_DATA_HPP_
#define WSNER_DATA_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wsner/core.hpp"

namespace wsner {

// ---------------------------------------------------------------------------
// Corpus IO
// ---------------------------------------------------------------------------

enum class CorpusFormat { bio_columns, json_lines };

CorpusFormat format_from_string(const std::string& s);
// .jsonl/.json -> json_lines, anything else -> bio_columns.
CorpusFormat format_from_path(const std::string& path);

// bio-columns: "token<space>tag" per line, blank line between sentences.
// The single tag column is read into / written from `bio_slot`.
// json-lines: one object per line with keys tokens, gold_spans, weak_spans,
// origin_language; span lists are arrays of [start, end, "Type"].
Corpus read_corpus(const std::string& path, CorpusFormat format,
                   const TagScheme& scheme,
                   LabelSource bio_slot = LabelSource::gold);
void write_corpus(const Corpus& corpus, const std::string& path,
                  CorpusFormat format, LabelSource bio_slot = LabelSource::gold);

// Serialization to strings (write_corpus = atomic file write of these).
Corpus parse_corpus(const std::string& content, CorpusFormat format,
                    const TagScheme& scheme,
                    LabelSource bio_slot = LabelSource::gold);
std::string serialize_corpus(const Corpus& corpus, CorpusFormat format,
                             LabelSource bio_slot = LabelSource::gold);

// Writes `content` to a temp file in the target directory, then renames.
void atomic_write_file(const std::string& path, const std::string& content);

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

struct FilterConfig {
  int min_words = 4;
  int min_chars = 15;
  int max_chars = 500;
  bool reject_non_ascii = true;
  bool dedupe = true;
  // External quality hook (stands in for a grammar-checking service).
  // Return false to reject. Default accepts everything.
  std::function<bool(const Sentence&)> quality_predicate;

  void validate() const;
};

// Rejection counts keyed by the first failing rule, in rule order.
struct FilterReport {
  long kept = 0;
  long rejected_length_words = 0;
  long rejected_length_chars_min = 0;
  long rejected_length_chars_max = 0;
  long rejected_non_ascii = 0;
  long rejected_duplicate = 0;
  long rejected_predicate = 0;

  long total_rejected() const {
    return rejected_length_words + rejected_length_chars_min +
           rejected_length_chars_max + rejected_non_ascii +
           rejected_duplicate + rejected_predicate;
  }
};

struct FilterResult {
  Corpus kept;
  FilterReport report;
};

// Keeps exactly the sentences passing every enabled rule, original order
// preserved. Rules run in the fixed order [length-words, length-chars-min,
// length-chars-max, non-ascii, duplicate, predicate]; each rejection counts
// against the first failing rule. Duplicate matching compares the sentence
// text after trimming and collapsing whitespace runs, against previously
// *kept* sentences.
FilterResult filter_corpus(const Corpus& corpus, const FilterConfig& config);

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct CorpusStats {
  long total_entries = 0;
  long total_words = 0;
  long total_labelled_words = 0;
  long total_entities = 0;
  double mean_entity_length = 0.0;     // words per entity
  double percent_labelled_words = 0.0; // 0..100
  double mean_entities_per_entry = 0.0;
};

CorpusStats corpus_stats(const Corpus& corpus, LabelSource source);
std::map<std::string, long> entity_counts(const Corpus& corpus,
                                          LabelSource source);

// Aligned text table / CSV with the canonical row names.
std::string stats_table(const CorpusStats& s);
std::string stats_csv(const CorpusStats& s);

// ---------------------------------------------------------------------------
// Entity-stratified Monte Carlo split
// ---------------------------------------------------------------------------

struct SplitSpec {
  long train = 0;
  long validation = 0;
  long test = 0;
  long iterations = 10000;
  uint64_t seed = 0;

  // 70/10/20 rounded, remainder to test.
  static SplitSpec default_sizes(long corpus_size);
};

struct SplitResult {
  Corpus train;
  Corpus validation;
  Corpus test;
  double best_score = 0.0;
  long best_iteration = 0;
};

// Candidate shuffle for one iteration: a permutation of [0, n). Exposed so
// the chosen split can be re-derived and re-scored externally.
std::vector<size_t> split_candidate_order(size_t n, uint64_t seed,
                                          long iteration);

// Per-type L1 deviation of a candidate partition from per-partition size
// proportionality: sum over entity types t with nonzero total count and
// partitions p of |count(t,p)/count(t) - size(p)/n|.
double split_deviation_score(const Corpus& corpus, LabelSource source,
                             const std::vector<size_t>& order,
                             const SplitSpec& spec);

// Runs spec.iterations candidate shuffles and returns the partition with the
// minimum deviation score; ties break on the lowest iteration index.
SplitResult monte_carlo_split(const Corpus& corpus, const SplitSpec& spec,
                              LabelSource source);

}  // namespace wsner

#endif  // WSNER_DATA_HPP_
