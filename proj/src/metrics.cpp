// wsner/metrics.cpp
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

#include "wsner/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace wsner {

namespace {

void check_alignment(const Corpus& a, const Corpus& b) {
  if (a.size() != b.size())
    throw Error("corpora not aligned: " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + " sentences");
  for (size_t i = 0; i < a.size(); ++i)
    if (a.sentences[i].tokens != b.sentences[i].tokens)
      throw Error("sentence " + std::to_string(i) +
                  ": tokens differ between pred and gold corpora");
}

const std::vector<EntitySpan>& spans_or_throw(const Corpus& c,
                                              LabelSource source, size_t idx) {
  const auto* spans = spans_of(c.sentences[idx], source);
  if (!spans)
    throw Error("sentence " + std::to_string(idx) + ": missing " +
                to_string(source) + " labels");
  return *spans;
}

struct TypeCounts {
  long matched = 0;
  long predicted = 0;
  long gold = 0;
};

double safe_div(long num, long den) {
  return den > 0 ? 100.0 * num / den : 0.0;
}

PRFRow make_row(long matched, long predicted, long gold) {
  PRFRow row;
  row.matched = matched;
  row.predicted = predicted;
  row.support = gold;
  row.precision = safe_div(matched, predicted);
  row.recall = safe_div(matched, gold);
  row.f1 = (row.precision + row.recall) > 0.0
               ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
               : 0.0;
  return row;
}

PRFReport report_over(const Corpus& pred, LabelSource pred_source,
                      const Corpus& gold, LabelSource gold_source,
                      const std::vector<size_t>& indices) {
  std::map<std::string, TypeCounts> counts;
  for (const auto& t : gold.scheme.types) counts[t];

  for (size_t idx : indices) {
    const auto& p = spans_or_throw(pred, pred_source, idx);
    const auto& g = spans_or_throw(gold, gold_source, idx);
    std::set<EntitySpan> gold_set(g.begin(), g.end());
    for (const auto& span : p) {
      auto& c = counts[span.etype];
      ++c.predicted;
      if (gold_set.count(span)) ++c.matched;
    }
    for (const auto& span : g) ++counts[span.etype].gold;
  }

  PRFReport report;
  long tot_matched = 0, tot_pred = 0, tot_gold = 0;
  double wp = 0.0, wr = 0.0, wf = 0.0;
  for (const auto& [etype, c] : counts) {
    tot_matched += c.matched;
    tot_pred += c.predicted;
    tot_gold += c.gold;
  }
  // per_type in scheme order; types outside the scheme (possible when pred
  // carries foreign labels) are appended alphabetically.
  std::vector<std::string> order = gold.scheme.types;
  for (const auto& [etype, c] : counts)
    if (std::find(order.begin(), order.end(), etype) == order.end())
      order.push_back(etype);
  for (const auto& etype : order) {
    const auto& c = counts[etype];
    PRFRow row = make_row(c.matched, c.predicted, c.gold);
    wp += row.precision * c.gold;
    wr += row.recall * c.gold;
    wf += row.f1 * c.gold;
    report.per_type.emplace_back(etype, row);
  }
  report.micro = make_row(tot_matched, tot_pred, tot_gold);
  report.weighted = report.micro;
  if (tot_gold > 0) {
    report.weighted.precision = wp / tot_gold;
    report.weighted.recall = wr / tot_gold;
    report.weighted.f1 = wf / tot_gold;
  }
  return report;
}

std::vector<size_t> all_indices(size_t n) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

PRFReport span_prf(const Corpus& pred, LabelSource pred_source,
                   const Corpus& gold, LabelSource gold_source) {
  check_alignment(pred, gold);
  return report_over(pred, pred_source, gold, gold_source,
                     all_indices(gold.size()));
}

PRFReport span_prf(const SpanSource& pred, const SpanSource& gold) {
  return span_prf(*pred.corpus, pred.source, *gold.corpus, gold.source);
}

AgreementReport pairwise_agreement(const std::vector<SpanSource>& annotations) {
  if (annotations.size() < 2)
    throw Error("pairwise agreement needs at least 2 annotation sources, got " +
                std::to_string(annotations.size()));
  AgreementReport report;
  for (size_t i = 0; i < annotations.size(); ++i) {
    for (size_t j = i + 1; j < annotations.size(); ++j) {
      PRFReport prf = span_prf(annotations[i], annotations[j]);
      std::string name =
          std::to_string(i + 1) + " vs " + std::to_string(j + 1);
      report.pair_scores.emplace_back(name, prf.micro.f1);
    }
  }
  double sum = 0.0;
  for (const auto& [name, f1] : report.pair_scores) sum += f1;
  report.mean_f1 = sum / report.pair_scores.size();
  double var = 0.0;
  for (const auto& [name, f1] : report.pair_scores)
    var += (f1 - report.mean_f1) * (f1 - report.mean_f1);
  report.std_dev = std::sqrt(var / report.pair_scores.size());
  return report;
}

std::vector<LanguageRow> compare_by_language(const Corpus& pred,
                                             LabelSource pred_source,
                                             const Corpus& gold,
                                             LabelSource gold_source) {
  check_alignment(pred, gold);
  std::map<std::string, std::vector<size_t>> by_language;
  for (size_t i = 0; i < gold.size(); ++i) {
    const auto& lang = gold.sentences[i].origin_language;
    if (!lang)
      throw Error("sentence " + std::to_string(i) + ": missing origin_language");
    by_language[*lang].push_back(i);
  }

  std::vector<LanguageRow> rows;
  LanguageRow combined;
  combined.language = "Combined";
  combined.entries = static_cast<long>(gold.size());
  combined.report = report_over(pred, pred_source, gold, gold_source,
                                all_indices(gold.size()));
  rows.push_back(std::move(combined));

  // Canonical order for the four source languages, then others.
  std::vector<std::string> order = {"English", "French", "Indonesian",
                                    "Mandarin"};
  for (const auto& [lang, idx] : by_language)
    if (std::find(order.begin(), order.end(), lang) == order.end())
      order.push_back(lang);
  for (const auto& lang : order) {
    auto it = by_language.find(lang);
    if (it == by_language.end()) continue;
    LanguageRow row;
    row.language = lang;
    row.entries = static_cast<long>(it->second.size());
    row.report = report_over(pred, pred_source, gold, gold_source, it->second);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

namespace {

std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, v);
  return buf;
}

void append_aligned(std::string& out,
                    const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out.append(widths[c] - row[c].size() + 2, ' ');
    }
    out += '\n';
  }
}

}  // namespace

std::string prf_table(const PRFReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Entity Type", "Pre.", "Rec.", "F1", "Support"});
  for (const auto& [etype, row] : report.per_type)
    rows.push_back({etype, fixed(row.precision, 1), fixed(row.recall, 1),
                    fixed(row.f1, 1), std::to_string(row.support)});
  rows.push_back({"Weighted Avg", fixed(report.weighted.precision, 1),
                  fixed(report.weighted.recall, 1),
                  fixed(report.weighted.f1, 1),
                  std::to_string(report.weighted.support)});
  rows.push_back({"Micro", fixed(report.micro.precision, 1),
                  fixed(report.micro.recall, 1), fixed(report.micro.f1, 1),
                  std::to_string(report.micro.support)});
  std::string out;
  append_aligned(out, rows);
  return out;
}

std::string prf_csv(const PRFReport& report) {
  std::string out = "Entity Type,Pre.,Rec.,F1,Support\n";
  auto line = [&](const std::string& name, const PRFRow& row) {
    out += name + "," + fixed(row.precision, 2) + "," + fixed(row.recall, 2) +
           "," + fixed(row.f1, 2) + "," + std::to_string(row.support) + "\n";
  };
  for (const auto& [etype, row] : report.per_type) line(etype, row);
  line("Weighted Avg", report.weighted);
  line("Micro", report.micro);
  return out;
}

std::string agreement_table(const AgreementReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Test", "F1", "Std. Dev"});
  for (const auto& [name, f1] : report.pair_scores)
    rows.push_back({name, fixed(f1, 1), "-"});
  rows.push_back({"Mean", fixed(report.mean_f1, 1), fixed(report.std_dev, 2)});
  std::string out;
  append_aligned(out, rows);
  return out;
}

std::string agreement_csv(const AgreementReport& report) {
  std::string out = "Test,F1,Std. Dev\n";
  for (const auto& [name, f1] : report.pair_scores)
    out += name + "," + fixed(f1, 2) + ",\n";
  out += "Mean," + fixed(report.mean_f1, 2) + "," + fixed(report.std_dev, 2) +
         "\n";
  return out;
}

std::string language_table(const std::vector<LanguageRow>& rows) {
  std::vector<std::vector<std::string>> table;
  table.push_back({"Entry Language", "Entries", "Pre.", "Rec.", "F1"});
  for (const auto& row : rows)
    table.push_back({row.language, std::to_string(row.entries),
                     fixed(row.report.micro.precision, 1),
                     fixed(row.report.micro.recall, 1),
                     fixed(row.report.micro.f1, 1)});
  std::string out;
  append_aligned(out, table);
  return out;
}

std::string language_csv(const std::vector<LanguageRow>& rows) {
  std::string out = "Entry Language,Entries,Pre.,Rec.,F1\n";
  for (const auto& row : rows)
    out += row.language + "," + std::to_string(row.entries) + "," +
           fixed(row.report.micro.precision, 2) + "," +
           fixed(row.report.micro.recall, 2) + "," +
           fixed(row.report.micro.f1, 2) + "\n";
  return out;
}

}  // namespace wsner
