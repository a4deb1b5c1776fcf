// src/experiment.cpp
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

#include "wsner/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "wsner/data.hpp"
#include "wsner/metrics.hpp"
#include "wsner/svg_plot.hpp"

namespace wsner {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

const char* to_string(BackboneVariant v) {
  switch (v) {
    case BackboneVariant::none: return "none";
    case BackboneVariant::indomain_weak: return "indomain_weak";
    case BackboneVariant::ood_indomain_weak: return "ood_weak+indomain_weak";
  }
  return "?";
}

BackboneVariant backbone_from_string(const std::string& s) {
  if (s == "none") return BackboneVariant::none;
  if (s == "indomain_weak") return BackboneVariant::indomain_weak;
  if (s == "ood_weak+indomain_weak") return BackboneVariant::ood_indomain_weak;
  throw Error("unknown backbone variant '" + s + "'");
}

void ExperimentGrid::validate() const {
  if (variants.empty()) throw Error("experiment grid: no variants");
  if (strong_sizes.empty()) throw Error("experiment grid: no strong sizes");
  if (seeds.empty()) throw Error("experiment grid: no seeds");
  bool any_weak_variant = false;
  for (BackboneVariant v : variants)
    any_weak_variant = any_weak_variant || v != BackboneVariant::none;
  if (any_weak_variant && weak_sizes.empty())
    throw Error("experiment grid: weak-backbone variants need weak sizes");
  for (long w : weak_sizes)
    if (w <= 0) throw Error("experiment grid: weak sizes must be positive");
  for (long s : strong_sizes)
    if (s < 0) throw Error("experiment grid: strong sizes must be >= 0");
  bool has_none = false, has_zero_strong = false;
  for (BackboneVariant v : variants) has_none = has_none || v == BackboneVariant::none;
  for (long s : strong_sizes) has_zero_strong = has_zero_strong || s == 0;
  if (has_none && has_zero_strong)
    throw Error("experiment grid: variant 'none' with strong size 0 has "
                "nothing to train; split the grid");
}

std::string cell_key(BackboneVariant variant, long weak_size, long strong_size,
                     uint64_t seed) {
  return std::string(to_string(variant)) + "|" + std::to_string(weak_size) +
         "|" + std::to_string(strong_size) + "|" + std::to_string(seed);
}

namespace {

Corpus subset(const Corpus& c, const std::vector<size_t>& indices) {
  Corpus out;
  out.scheme = c.scheme;
  out.quality = c.quality;
  out.domain_tag = c.domain_tag;
  out.sentences.reserve(indices.size());
  for (size_t i : indices) out.sentences.push_back(c.sentences[i]);
  return out;
}

Corpus prefix_subset(const Corpus& c, long n) {
  std::vector<size_t> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), size_t{0});
  return subset(c, idx);
}

}  // namespace

CellResult run_cell(const ExperimentData& data, BackboneVariant variant,
                    long weak_size, long strong_size, uint64_t seed) {
  const std::string key = cell_key(variant, weak_size, strong_size, seed);
  if (data.indomain_weak == nullptr)
    throw Error("cell " + key + ": missing in-domain weak corpus");
  if (data.strong_train == nullptr)
    throw Error("cell " + key + ": missing strong corpus");
  if (data.eval == nullptr) throw Error("cell " + key + ": missing eval corpus");
  const bool use_ood = variant == BackboneVariant::ood_indomain_weak;
  const bool use_weak = variant != BackboneVariant::none;
  if (use_ood && data.ood_weak == nullptr)
    throw Error("cell " + key + ": missing out-of-domain weak corpus");
  if (variant == BackboneVariant::none && strong_size <= 0)
    throw Error("cell " + key + ": variant none requires strong data");
  if (use_weak &&
      (weak_size <= 0 ||
       weak_size > static_cast<long>(data.indomain_weak->size())))
    throw Error("cell " + key + ": weak size out of range");
  if (strong_size < 0 ||
      strong_size > static_cast<long>(data.strong_train->size()))
    throw Error("cell " + key + ": strong size out of range");
  if (data.strong_train->scheme != data.indomain_weak->scheme ||
      data.eval->scheme != data.indomain_weak->scheme)
    throw Error("cell " + key + ": in-domain corpora use different schemes");

  // Shared vocabulary over all training text, so every variant sees the same
  // input space.
  std::vector<const Corpus*> vocab_sources;
  if (data.ood_weak != nullptr) vocab_sources.push_back(data.ood_weak);
  vocab_sources.push_back(data.indomain_weak);
  vocab_sources.push_back(data.strong_train);
  Vocab vocab = Vocab::build(vocab_sources);

  Corpus weak_sub;
  if (use_weak) weak_sub = prefix_subset(*data.indomain_weak, weak_size);
  Corpus strong_sub;
  if (strong_size > 0) {
    std::vector<size_t> order(data.strong_train->size());
    std::iota(order.begin(), order.end(), size_t{0});
    Rng(seed).derive(77).shuffle(order);
    order.resize(static_cast<size_t>(strong_size));
    std::sort(order.begin(), order.end());
    strong_sub = subset(*data.strong_train, order);
  }

  const std::vector<Phase> weak_phases = {Phase::ensemble, Phase::self_train};
  std::vector<Stage> stages;
  if (use_ood) {
    Stage st;
    st.name = "ood_weak";
    st.corpus = data.ood_weak;
    st.quality = Quality::weak;
    st.phases = weak_phases;
    st.scheme = data.ood_weak->scheme;
    stages.push_back(std::move(st));
  }
  if (use_weak) {
    Stage st;
    st.name = "indomain_weak";
    st.corpus = &weak_sub;
    st.quality = Quality::weak;
    st.phases = weak_phases;
    st.scheme = weak_sub.scheme;
    stages.push_back(std::move(st));
  }
  if (strong_size > 0) {
    Stage st;
    st.name = "strong";
    st.corpus = &strong_sub;
    st.quality = Quality::strong;
    st.phases = {Phase::noise_robust};
    st.scheme = strong_sub.scheme;
    st.epochs = data.strong_epochs;
    stages.push_back(std::move(st));
  }
  StagePlan plan;
  plan.stages = std::move(stages);

  TrainConfig cfg = data.config;
  cfg.seed = seed;
  TaggerParams init = TaggerParams::init(plan.stages.front().scheme,
                                         std::move(vocab), data.dims, seed);
  PipelineOptions options;
  options.augment = data.augment;
  PipelineResult trained =
      run_controster(plan, cfg, std::move(init), options);

  Corpus pred = predict_tags(trained.params, *data.eval);
  PRFReport report =
      span_prf(pred, LabelSource::weak, *data.eval, LabelSource::gold);

  CellResult result;
  result.variant = variant;
  result.weak_size = use_weak ? weak_size : 0;
  result.strong_size = strong_size;
  result.seed = seed;
  result.precision = report.weighted.precision;
  result.recall = report.weighted.recall;
  result.f1 = report.weighted.f1;
  for (const auto& [etype, row] : report.per_type)
    result.per_type_f1.emplace_back(etype, row.f1);
  return result;
}

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

namespace {

ordered_json cell_to_json(const std::string& key, const CellResult& r) {
  ordered_json j;
  j["key"] = key;
  j["variant"] = to_string(r.variant);
  j["weak_size"] = r.weak_size;
  j["strong_size"] = r.strong_size;
  j["seed"] = r.seed;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  ordered_json per_type = ordered_json::array();
  for (const auto& [etype, f1] : r.per_type_f1)
    per_type.push_back(ordered_json::array({etype, f1}));
  j["per_type"] = per_type;
  return j;
}

CellResult cell_from_json(const ordered_json& j) {
  CellResult r;
  r.variant = backbone_from_string(j.at("variant").get<std::string>());
  r.weak_size = j.at("weak_size").get<long>();
  r.strong_size = j.at("strong_size").get<long>();
  r.seed = j.at("seed").get<uint64_t>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  for (const auto& entry : j.at("per_type"))
    r.per_type_f1.emplace_back(entry.at(0).get<std::string>(),
                               entry.at(1).get<double>());
  return r;
}

std::map<std::string, CellResult> load_ledger(const std::string& path) {
  std::map<std::string, CellResult> cells;
  std::ifstream in(path);
  if (!in) return cells;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ordered_json j = ordered_json::parse(line);
      cells[j.at("key").get<std::string>()] = cell_from_json(j);
    } catch (const std::exception& e) {
      throw Error("experiment ledger " + path + " line " +
                  std::to_string(line_no) + ": " + e.what());
    }
  }
  return cells;
}

}  // namespace

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

std::string results_csv(const std::vector<CellResult>& rows) {
  std::string out = "variant,weak_size,strong_size,seed,precision,recall,f1";
  if (!rows.empty())
    for (const auto& [etype, f1] : rows.front().per_type_f1) {
      (void)f1;
      out += ",f1_" + etype;
    }
  out += "\n";
  for (const CellResult& r : rows) {
    out += std::string(to_string(r.variant)) + "," +
           std::to_string(r.weak_size) + "," + std::to_string(r.strong_size) +
           "," + std::to_string(r.seed) + "," + fixed2(r.precision) + "," +
           fixed2(r.recall) + "," + fixed2(r.f1);
    for (const auto& [etype, f1] : r.per_type_f1) {
      (void)etype;
      out += "," + fixed2(f1);
    }
    out += "\n";
  }
  return out;
}

std::vector<CellResult> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw Error("results csv: missing header");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 7 || header[0] != "variant")
    throw Error("results csv: unexpected header");
  std::vector<std::string> type_names;
  for (size_t c = 7; c < header.size(); ++c) {
    if (header[c].rfind("f1_", 0) != 0)
      throw Error("results csv: unexpected column '" + header[c] + "'");
    type_names.push_back(header[c].substr(3));
  }
  std::vector<CellResult> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size())
      throw Error("results csv line " + std::to_string(line_no) +
                  ": wrong column count");
    try {
      CellResult r;
      r.variant = backbone_from_string(cells[0]);
      r.weak_size = std::stol(cells[1]);
      r.strong_size = std::stol(cells[2]);
      r.seed = std::stoull(cells[3]);
      r.precision = std::stod(cells[4]);
      r.recall = std::stod(cells[5]);
      r.f1 = std::stod(cells[6]);
      for (size_t c = 7; c < cells.size(); ++c)
        r.per_type_f1.emplace_back(type_names[c - 7], std::stod(cells[c]));
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error("results csv line " + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  return rows;
}

namespace {

struct GroupStats {
  long runs = 0;
  double sum_p = 0, sum_r = 0, sum_f = 0, sum_f_sq = 0;

  void add(const CellResult& r) {
    ++runs;
    sum_p += r.precision;
    sum_r += r.recall;
    sum_f += r.f1;
    sum_f_sq += r.f1 * r.f1;
  }
  double mean_f1() const { return runs ? sum_f / runs : 0.0; }
  double std_f1() const {
    if (runs == 0) return 0.0;
    double m = mean_f1();
    double var = sum_f_sq / runs - m * m;
    return var > 0 ? std::sqrt(var) : 0.0;
  }
};

}  // namespace

std::string summary_csv(const std::vector<CellResult>& rows) {
  // Grouped by (variant, weak, strong) in first-appearance order.
  std::vector<std::tuple<BackboneVariant, long, long>> order;
  std::map<std::tuple<BackboneVariant, long, long>, GroupStats> groups;
  for (const CellResult& r : rows) {
    auto k = std::make_tuple(r.variant, r.weak_size, r.strong_size);
    if (groups.find(k) == groups.end()) order.push_back(k);
    groups[k].add(r);
  }
  std::string out =
      "variant,weak_size,strong_size,runs,mean_precision,mean_recall,"
      "mean_f1,std_f1\n";
  for (const auto& k : order) {
    const auto& [variant, weak, strong] = k;
    const GroupStats& g = groups[k];
    out += std::string(to_string(variant)) + "," + std::to_string(weak) + "," +
           std::to_string(strong) + "," + std::to_string(g.runs) + "," +
           fixed2(g.sum_p / g.runs) + "," + fixed2(g.sum_r / g.runs) + "," +
           fixed2(g.mean_f1()) + "," + fixed2(g.std_f1()) + "\n";
  }
  return out;
}

std::string f1_vs_strong_svg(const std::vector<CellResult>& rows) {
  // One series per variant at that variant's largest weak size, mean F1 over
  // seeds at each nonzero strong size.
  std::map<BackboneVariant, long> max_weak;
  for (const CellResult& r : rows)
    max_weak[r.variant] = std::max(max_weak[r.variant], r.weak_size);
  std::vector<BackboneVariant> variant_order;
  std::map<BackboneVariant, std::map<long, std::pair<double, long>>> acc;
  for (const CellResult& r : rows) {
    if (r.strong_size <= 0 || r.weak_size != max_weak[r.variant]) continue;
    if (acc.find(r.variant) == acc.end()) variant_order.push_back(r.variant);
    auto& [sum, count] = acc[r.variant][r.strong_size];
    sum += r.f1;
    ++count;
  }
  PlotSpec spec;
  spec.title = "Test F1 vs strong training size";
  spec.xlabel = "strong entries";
  spec.ylabel = "weighted F1";
  for (BackboneVariant v : variant_order) {
    PlotSeries series;
    series.label = to_string(v);
    for (const auto& [strong, sc] : acc[v])
      series.points.emplace_back(static_cast<double>(strong),
                                 sc.first / sc.second);
    spec.series.push_back(std::move(series));
  }
  return render_line_plot(spec);
}

std::string f1_vs_weak_svg(const std::vector<CellResult>& rows) {
  // One series per (variant, strong size) over weak sizes, mean F1 over seeds.
  std::vector<std::pair<BackboneVariant, long>> series_order;
  std::map<std::pair<BackboneVariant, long>,
           std::map<long, std::pair<double, long>>>
      acc;
  for (const CellResult& r : rows) {
    if (r.variant == BackboneVariant::none || r.weak_size <= 0) continue;
    auto k = std::make_pair(r.variant, r.strong_size);
    if (acc.find(k) == acc.end()) series_order.push_back(k);
    auto& [sum, count] = acc[k][r.weak_size];
    sum += r.f1;
    ++count;
  }
  PlotSpec spec;
  spec.title = "Test F1 vs weak training size";
  spec.xlabel = "weak entries";
  spec.ylabel = "weighted F1";
  for (const auto& k : series_order) {
    PlotSeries series;
    series.label = std::string(to_string(k.first)) +
                   ", strong=" + std::to_string(k.second);
    for (const auto& [weak, sc] : acc[k])
      series.points.emplace_back(static_cast<double>(weak),
                                 sc.first / sc.second);
    spec.series.push_back(std::move(series));
  }
  return render_line_plot(spec);
}

// ---------------------------------------------------------------------------
// Grid runner
// ---------------------------------------------------------------------------

ExperimentReport run_experiment(const ExperimentGrid& grid,
                                const ExperimentData& data,
                                const std::string& out_dir,
                                const ProgressFn& progress) {
  grid.validate();
  std::filesystem::create_directories(out_dir);
  const std::string ledger_path = out_dir + "/ledger.jsonl";
  std::map<std::string, CellResult> done = load_ledger(ledger_path);

  std::ofstream ledger(ledger_path, std::ios::app);
  if (!ledger)
    throw Error("experiment: cannot open ledger " + ledger_path);

  ExperimentReport report;
  for (BackboneVariant variant : grid.variants) {
    std::vector<long> weak_list =
        variant == BackboneVariant::none ? std::vector<long>{0}
                                         : grid.weak_sizes;
    for (long weak : weak_list)
      for (long strong : grid.strong_sizes)
        for (uint64_t seed : grid.seeds) {
          const std::string key = cell_key(variant, weak, strong, seed);
          auto it = done.find(key);
          if (it != done.end()) {
            if (progress) progress("cell " + key + ": cached");
            report.rows.push_back(it->second);
            continue;
          }
          if (progress) progress("cell " + key + ": running");
          CellResult r = run_cell(data, variant, weak, strong, seed);
          ledger << cell_to_json(key, r).dump() << "\n";
          ledger.flush();
          done[key] = r;
          report.rows.push_back(std::move(r));
          if (progress)
            progress("cell " + key +
                     ": done f1=" + fixed2(report.rows.back().f1));
        }
  }

  const std::string csv = results_csv(report.rows);
  atomic_write_file(out_dir + "/results.csv", csv);
  // Plot from the CSV-rounded rows so a regeneration from results.csv is
  // byte-identical.
  std::vector<CellResult> rounded = parse_results_csv(csv);
  atomic_write_file(out_dir + "/summary.csv", summary_csv(rounded));
  atomic_write_file(out_dir + "/f1_vs_strong.svg", f1_vs_strong_svg(rounded));
  atomic_write_file(out_dir + "/f1_vs_weak.svg", f1_vs_weak_svg(rounded));
  report.artifacts = {out_dir + "/results.csv", out_dir + "/summary.csv",
                      out_dir + "/f1_vs_strong.svg",
                      out_dir + "/f1_vs_weak.svg", ledger_path};
  return report;
}

// ---------------------------------------------------------------------------
// Spec file
// ---------------------------------------------------------------------------

ExperimentSpecFile read_experiment_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("experiment spec: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string where = "experiment spec " + path;
  ordered_json j;
  try {
    j = ordered_json::parse(ss.str());
  } catch (const ordered_json::exception& e) {
    throw Error(where + ": " + e.what());
  }
  if (!j.is_object()) throw Error(where + ": expected a JSON object");

  ExperimentSpecFile spec;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "variants") {
        for (const auto& v : value)
          spec.grid.variants.push_back(
              backbone_from_string(v.get<std::string>()));
      } else if (key == "weak_sizes") {
        for (const auto& v : value) spec.grid.weak_sizes.push_back(v.get<long>());
      } else if (key == "strong_sizes") {
        for (const auto& v : value)
          spec.grid.strong_sizes.push_back(v.get<long>());
      } else if (key == "seeds") {
        for (const auto& v : value) spec.grid.seeds.push_back(v.get<uint64_t>());
      } else if (key == "corpora") {
        for (const auto& [ck, cv] : value.items()) {
          if (ck == "ood_weak") spec.ood_weak_path = cv.get<std::string>();
          else if (ck == "indomain_weak")
            spec.indomain_weak_path = cv.get<std::string>();
          else if (ck == "strong") spec.strong_path = cv.get<std::string>();
          else if (ck == "eval") spec.eval_path = cv.get<std::string>();
          else throw Error(where + ": unknown corpora key '" + ck + "'");
        }
      } else if (key == "scheme") {
        for (const auto& t : value)
          spec.scheme_types.push_back(t.get<std::string>());
      } else if (key == "ood_scheme") {
        for (const auto& t : value)
          spec.ood_scheme_types.push_back(t.get<std::string>());
      } else if (key == "dims") {
        for (const auto& [dk, dv] : value.items()) {
          if (dk == "emb_dim") spec.dims.emb_dim = dv.get<int>();
          else if (dk == "hidden_dim") spec.dims.hidden_dim = dv.get<int>();
          else throw Error(where + ": unknown dims key '" + dk + "'");
        }
      } else if (key == "config") {
        spec.config = parse_train_config(value.dump(), where + " config");
      } else if (key == "strong_epochs") {
        spec.strong_epochs = value.get<int>();
      } else if (key == "augment") {
        for (const auto& [ak, av] : value.items()) {
          if (ak == "gazetteers") spec.gazetteers_path = av.get<std::string>();
          else if (ak == "drop_rate") spec.drop_rate = av.get<double>();
          else if (ak == "replace_prob") spec.replace_prob = av.get<double>();
          else throw Error(where + ": unknown augment key '" + ak + "'");
        }
      } else {
        throw Error(where + ": unknown key '" + key + "'");
      }
    }
  } catch (const ordered_json::exception& e) {
    throw Error(where + ": " + e.what());
  }
  if (spec.indomain_weak_path.empty() || spec.strong_path.empty() ||
      spec.eval_path.empty())
    throw Error(where + ": corpora needs indomain_weak, strong and eval");
  spec.grid.validate();
  return spec;
}

}  // namespace wsner
