// wsner/metrics.hpp
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

#ifndef WSNER_METRICS_HPP_
#define WSNER_METRICS_HPP_

#include <string>
#include <vector>

#include "wsner/core.hpp"

namespace wsner {

// A corpus together with the span slot to evaluate.
struct SpanSource {
  const Corpus* corpus = nullptr;
  LabelSource source = LabelSource::gold;
};

// Percentages in [0, 100]. support counts gold spans, predicted counts
// predicted spans of the row's type.
struct PRFRow {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
  long predicted = 0;
  long matched = 0;
};

struct PRFReport {
  std::vector<std::pair<std::string, PRFRow>> per_type;  // scheme order
  PRFRow micro;
  PRFRow weighted;  // per-type P/R/F1 averaged with gold-support weights
};

// Exact-match span evaluation: a predicted span is a true positive iff the
// identical (start, end, type) triple exists in the gold spans of the same
// sentence. Requires the corpora to be aligned token-for-token.
PRFReport span_prf(const Corpus& pred, LabelSource pred_source,
                   const Corpus& gold, LabelSource gold_source);
PRFReport span_prf(const SpanSource& pred, const SpanSource& gold);

struct AgreementReport {
  double mean_f1 = 0.0;
  double std_dev = 0.0;  // population std over pairwise scores
  std::vector<std::pair<std::string, double>> pair_scores;  // "i vs j" -> micro F1
};

// Micro span F1 for every unordered pair of aligned annotation sources.
AgreementReport pairwise_agreement(const std::vector<SpanSource>& annotations);

struct LanguageRow {
  std::string language;  // "Combined" for the all-entries row
  long entries = 0;
  PRFReport report;
};

// span_prf restricted to each origin_language subset, preceded by the
// combined row. Every sentence must carry a language tag.
std::vector<LanguageRow> compare_by_language(const Corpus& pred,
                                             LabelSource pred_source,
                                             const Corpus& gold,
                                             LabelSource gold_source);

// Formatting. Tables are aligned text; CSVs use the same row/column names.
std::string prf_table(const PRFReport& report);
std::string prf_csv(const PRFReport& report);
std::string agreement_table(const AgreementReport& report);
std::string agreement_csv(const AgreementReport& report);
std::string language_table(const std::vector<LanguageRow>& rows);
std::string language_csv(const std::vector<LanguageRow>& rows);

}  // namespace wsner

#endif  // WSNER_METRICS_HPP_
