// src/cli.cpp
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

#include "wsner/cli.hpp"

#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "wsner/core.hpp"
#include "wsner/data.hpp"
#include "wsner/experiment.hpp"
#include "wsner/metrics.hpp"
#include "wsner/model.hpp"
#include "wsner/train.hpp"
#include "wsner/weaklabel.hpp"

namespace wsner {

namespace {

TagScheme scheme_from_flag(const std::string& csv) {
  if (csv.empty()) return TagScheme::outbreak_news();
  std::vector<std::string> types;
  std::istringstream in(csv);
  std::string part;
  while (std::getline(in, part, ',')) {
    while (!part.empty() && part.front() == ' ') part.erase(part.begin());
    while (!part.empty() && part.back() == ' ') part.pop_back();
    if (!part.empty()) types.push_back(part);
  }
  if (types.empty()) throw Error("--scheme: no entity types given");
  return TagScheme::of(std::move(types));
}

Corpus load_corpus(const std::string& path, const TagScheme& scheme,
                   LabelSource bio_slot) {
  return read_corpus(path, format_from_path(path), scheme, bio_slot);
}

void save_corpus(const Corpus& corpus, const std::string& path,
                 LabelSource bio_slot) {
  write_corpus(corpus, path, format_from_path(path), bio_slot);
}

void print_entity_counts(std::ostream& out, const Corpus& corpus,
                         LabelSource source) {
  auto counts = entity_counts(corpus, source);
  out << "\nEntity Type,Count\n";
  long total = 0;
  for (const std::string& etype : corpus.scheme.types) {
    out << etype << "," << counts[etype] << "\n";
    total += counts[etype];
    counts.erase(etype);
  }
  for (const auto& [etype, count] : counts) {
    out << etype << "," << count << "\n";
    total += count;
  }
  out << "Total," << total << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Weakly supervised named-entity tagging toolkit"};
  app.require_subcommand(1);

  // ---- stats ----
  struct StatsArgs {
    std::string in, labels = "gold", scheme;
    bool csv = false, counts = false;
  };
  auto sa = std::make_shared<StatsArgs>();
  CLI::App* stats = app.add_subcommand("stats", "Corpus statistics table");
  stats->add_option("--in", sa->in, "input corpus")->required();
  stats->add_option("--labels", sa->labels, "span slot: gold|weak");
  stats->add_option("--scheme", sa->scheme, "comma-separated entity types");
  stats->add_flag("--csv", sa->csv, "CSV instead of aligned table");
  stats->add_flag("--counts", sa->counts, "append per-type entity counts");
  stats->callback([sa, &out] {
    LabelSource src = label_source_from_string(sa->labels);
    Corpus corpus = load_corpus(sa->in, scheme_from_flag(sa->scheme), src);
    CorpusStats st = corpus_stats(corpus, src);
    out << (sa->csv ? stats_csv(st) : stats_table(st));
    if (sa->counts) print_entity_counts(out, corpus, src);
  });

  // ---- split ----
  struct SplitArgs {
    std::string in, labels = "gold", scheme, sizes;
    long iters = 10000;
    uint64_t seed = 0;
    std::string out_train = "train.jsonl", out_val = "validation.jsonl",
                out_test = "test.jsonl";
  };
  auto pa = std::make_shared<SplitArgs>();
  CLI::App* split =
      app.add_subcommand("split", "Entity-stratified train/val/test split");
  split->add_option("--in", pa->in, "input corpus")->required();
  split->add_option("--labels", pa->labels, "span slot: gold|weak");
  split->add_option("--scheme", pa->scheme, "comma-separated entity types");
  split->add_option("--sizes", pa->sizes,
                    "train,validation,test counts (default 70/10/20)");
  split->add_option("--iters", pa->iters, "candidate shuffles");
  split->add_option("--seed", pa->seed, "RNG seed");
  split->add_option("--out-train", pa->out_train, "train output path");
  split->add_option("--out-val", pa->out_val, "validation output path");
  split->add_option("--out-test", pa->out_test, "test output path");
  split->callback([pa, &out] {
    LabelSource src = label_source_from_string(pa->labels);
    Corpus corpus = load_corpus(pa->in, scheme_from_flag(pa->scheme), src);
    SplitSpec spec;
    if (pa->sizes.empty()) {
      spec = SplitSpec::default_sizes(static_cast<long>(corpus.size()));
    } else {
      std::istringstream ss(pa->sizes);
      std::string part;
      std::vector<long> sizes;
      while (std::getline(ss, part, ',')) sizes.push_back(std::stol(part));
      if (sizes.size() != 3)
        throw Error("split: --sizes expects three comma-separated counts");
      spec.train = sizes[0];
      spec.validation = sizes[1];
      spec.test = sizes[2];
    }
    spec.iterations = pa->iters;
    spec.seed = pa->seed;
    SplitResult result = monte_carlo_split(corpus, spec, src);
    save_corpus(result.train, pa->out_train, src);
    save_corpus(result.validation, pa->out_val, src);
    save_corpus(result.test, pa->out_test, src);
    out << "split " << result.train.size() << "/" << result.validation.size()
        << "/" << result.test.size() << " entries; best iteration "
        << result.best_iteration << " (deviation score " << result.best_score
        << ")\n";
  });

  // ---- filter ----
  struct FilterArgs {
    std::string in, output, labels = "gold", scheme;
    FilterConfig config;
    bool keep_non_ascii = false, no_dedupe = false;
  };
  auto fa = std::make_shared<FilterArgs>();
  CLI::App* filter = app.add_subcommand("filter", "Quality-filter a corpus");
  filter->add_option("--in", fa->in, "input corpus")->required();
  filter->add_option("--out", fa->output, "output corpus")->required();
  filter->add_option("--labels", fa->labels, "span slot: gold|weak");
  filter->add_option("--scheme", fa->scheme, "comma-separated entity types");
  filter->add_option("--min-words", fa->config.min_words, "minimum word count");
  filter->add_option("--min-chars", fa->config.min_chars,
                     "minimum character count");
  filter->add_option("--max-chars", fa->config.max_chars,
                     "maximum character count");
  filter->add_flag("--keep-non-ascii", fa->keep_non_ascii,
                   "do not reject non-ASCII sentences");
  filter->add_flag("--no-dedupe", fa->no_dedupe, "keep duplicate sentences");
  filter->callback([fa, &out] {
    LabelSource src = label_source_from_string(fa->labels);
    Corpus corpus = load_corpus(fa->in, scheme_from_flag(fa->scheme), src);
    FilterConfig config = fa->config;
    config.reject_non_ascii = !fa->keep_non_ascii;
    config.dedupe = !fa->no_dedupe;
    FilterResult result = filter_corpus(corpus, config);
    save_corpus(result.kept, fa->output, src);
    const FilterReport& r = result.report;
    out << "kept " << r.kept << "\n"
        << "rejected length-words " << r.rejected_length_words << "\n"
        << "rejected chars-min " << r.rejected_length_chars_min << "\n"
        << "rejected chars-max " << r.rejected_length_chars_max << "\n"
        << "rejected non-ascii " << r.rejected_non_ascii << "\n"
        << "rejected duplicate " << r.rejected_duplicate << "\n"
        << "rejected predicate " << r.rejected_predicate << "\n";
  });

  // ---- weak-label ----
  struct WeakLabelArgs {
    std::string in, output, rules, gazetteers, scheme;
  };
  auto wa = std::make_shared<WeakLabelArgs>();
  CLI::App* weak_label = app.add_subcommand(
      "weak-label", "Rule/gazetteer weak labeling into weak_spans");
  weak_label->add_option("--in", wa->in, "input corpus")->required();
  weak_label->add_option("--out", wa->output, "output corpus")->required();
  weak_label->add_option("--rules", wa->rules, "rules file (json lines)");
  weak_label->add_option("--gazetteers", wa->gazetteers,
                         "gazetteer file (adds phrase rules)");
  weak_label->add_option("--scheme", wa->scheme,
                         "comma-separated entity types");
  weak_label->callback([wa, &out] {
    if (wa->rules.empty() && wa->gazetteers.empty())
      throw Error("weak-label: need --rules and/or --gazetteers");
    TagScheme scheme = scheme_from_flag(wa->scheme);
    Corpus corpus = load_corpus(wa->in, scheme, LabelSource::gold);
    std::vector<Rule> rules;
    if (!wa->rules.empty()) rules = read_rules(wa->rules);
    if (!wa->gazetteers.empty()) {
      Gazetteers gaz = read_gazetteers(wa->gazetteers);
      for (const auto& [etype, phrases] : gaz)
        for (const auto& phrase : phrases) {
          std::string joined;
          for (const std::string& tok : phrase) {
            if (!joined.empty()) joined += ' ';
            joined += tok;
          }
          rules.push_back(make_phrase_rule(joined, etype));
        }
    }
    validate_rules(rules, scheme);
    Corpus labeled = weak_label_corpus(corpus, rules);
    save_corpus(labeled, wa->output, LabelSource::weak);
    long entities = 0;
    for (const Sentence& s : labeled.sentences)
      if (s.weak_spans) entities += static_cast<long>(s.weak_spans->size());
    out << "labeled " << labeled.size() << " sentences, " << entities
        << " weak entities (" << rules.size() << " rules)\n";
  });

  // ---- corrupt ----
  struct CorruptArgs {
    std::string in, output, profile, scheme;
    uint64_t seed = 0;
  };
  auto ca = std::make_shared<CorruptArgs>();
  CLI::App* corrupt = app.add_subcommand(
      "corrupt", "Derive weak labels by corrupting gold labels");
  corrupt->add_option("--in", ca->in, "gold-labeled input corpus")->required();
  corrupt->add_option("--out", ca->output, "output corpus")->required();
  corrupt->add_option("--profile", ca->profile, "noise profile (json)")
      ->required();
  CLI::Option* corrupt_seed =
      corrupt->add_option("--seed", ca->seed, "override profile seed");
  corrupt->add_option("--scheme", ca->scheme, "comma-separated entity types");
  corrupt->callback([ca, corrupt_seed, &out] {
    TagScheme scheme = scheme_from_flag(ca->scheme);
    Corpus corpus = load_corpus(ca->in, scheme, LabelSource::gold);
    NoiseProfile profile = read_noise_profile(ca->profile);
    if (corrupt_seed->count() > 0) profile.seed = ca->seed;
    profile.validate(scheme);
    Corpus corrupted = corrupt_gold(corpus, profile);
    save_corpus(corrupted, ca->output, LabelSource::weak);
    PRFReport quality = span_prf(corrupted, LabelSource::weak, corpus,
                                 LabelSource::gold);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", quality.weighted.f1);
    out << "corrupted " << corrupted.size()
        << " sentences; weak-vs-gold weighted F1 " << buf << "\n";
  });

  // ---- gensynth ----
  struct GensynthArgs {
    std::string spec, output, scheme;
    long count = 0;
    uint64_t seed = 0;
  };
  auto ga = std::make_shared<GensynthArgs>();
  CLI::App* gensynth =
      app.add_subcommand("gensynth", "Generate a synthetic gold corpus");
  gensynth->add_option("--spec", ga->spec, "generator spec (json)")->required();
  gensynth->add_option("--out", ga->output, "output corpus")->required();
  CLI::Option* gen_count =
      gensynth->add_option("--count", ga->count, "override sentence count");
  CLI::Option* gen_seed =
      gensynth->add_option("--seed", ga->seed, "override spec seed");
  gensynth->add_option("--scheme", ga->scheme, "comma-separated entity types");
  gensynth->callback([ga, gen_count, gen_seed, &out] {
    SynthSpec spec = read_synth_spec(ga->spec);
    if (gen_count->count() > 0) spec.sentence_count = ga->count;
    if (gen_seed->count() > 0) spec.seed = ga->seed;
    TagScheme scheme = scheme_from_flag(ga->scheme);
    Corpus corpus = generate_synthetic(spec, scheme);
    save_corpus(corpus, ga->output, LabelSource::gold);
    out << stats_table(corpus_stats(corpus, LabelSource::gold));
  });

  // ---- train ----
  struct TrainArgs {
    std::string plan, config, eval, gazetteers, scheme, output, eval_csv;
    double drop_rate = 0.1, replace_prob = 0.5;
    int emb_dim = 64, hidden_dim = 128;
    uint64_t seed = 0;
  };
  auto ta = std::make_shared<TrainArgs>();
  CLI::App* train =
      app.add_subcommand("train", "Run a staged training plan");
  train->add_option("--plan", ta->plan, "stage plan (json)")->required();
  train->add_option("--config", ta->config, "train config (json)");
  train->add_option("--eval", ta->eval, "gold eval corpus (per-stage report)");
  train->add_option("--gazetteers", ta->gazetteers,
                    "augmentation gazetteers for self-training");
  train->add_option("--drop-rate", ta->drop_rate,
                    "augmentation outside-token drop rate");
  train->add_option("--replace-prob", ta->replace_prob,
                    "augmentation entity substitution probability");
  train->add_option("--scheme", ta->scheme,
                    "default entity types for stages without one");
  train->add_option("--emb-dim", ta->emb_dim, "embedding dimension");
  train->add_option("--hidden-dim", ta->hidden_dim,
                    "recurrent hidden dimension");
  CLI::Option* train_seed =
      train->add_option("--seed", ta->seed, "override config seed");
  train->add_option("--out", ta->output, "checkpoint output path")->required();
  train->add_option("--eval-csv", ta->eval_csv,
                    "write the per-stage evaluation log as CSV");
  train->callback([ta, train_seed, &out] {
    StagePlanFile pf = read_stage_plan(ta->plan);
    TrainConfig cfg;
    if (!ta->config.empty()) cfg = read_train_config(ta->config);
    if (train_seed->count() > 0) cfg.seed = ta->seed;

    std::vector<Corpus> corpora;
    corpora.reserve(pf.stages.size());
    StagePlan plan;
    for (const StageFileSpec& sf : pf.stages) {
      TagScheme scheme = sf.scheme_types.empty()
                             ? scheme_from_flag(ta->scheme)
                             : TagScheme::of(sf.scheme_types);
      LabelSource slot = sf.quality == Quality::strong ? LabelSource::gold
                                                       : LabelSource::weak;
      corpora.push_back(load_corpus(sf.corpus_path, scheme, slot));
      Stage stage;
      stage.name = sf.name;
      stage.corpus = &corpora.back();
      stage.quality = sf.quality;
      stage.phases = sf.phases;
      stage.scheme = scheme;
      stage.epochs = sf.epochs;
      plan.stages.push_back(std::move(stage));
    }

    std::vector<const Corpus*> vocab_sources;
    for (const Corpus& c : corpora) vocab_sources.push_back(&c);
    Vocab vocab = Vocab::build(vocab_sources);
    ModelDims dims{ta->emb_dim, ta->hidden_dim};
    TaggerParams init =
        TaggerParams::init(plan.stages.front().scheme, std::move(vocab), dims,
                           cfg.seed);

    PipelineOptions options;
    Corpus eval_corpus;
    if (!ta->eval.empty()) {
      eval_corpus = load_corpus(ta->eval, plan.stages.back().scheme,
                                LabelSource::gold);
      options.eval_corpus = &eval_corpus;
    }
    if (!ta->gazetteers.empty())
      options.augment.gazetteers = read_gazetteers(ta->gazetteers);
    options.augment.drop_rate = ta->drop_rate;
    options.augment.replace_prob = ta->replace_prob;

    PipelineResult result =
        run_controster(plan, cfg, std::move(init), options);
    save_checkpoint(result.params, ta->output);
    out << "saved checkpoint " << ta->output << "\n";
    for (const StageEval& ev : result.evals) {
      out << "\nafter stage " << ev.stage << ":\n"
          << prf_table(ev.report);
    }
    if (!ta->eval_csv.empty())
      atomic_write_file(ta->eval_csv, stage_eval_csv(result.evals));
  });

  // ---- evaluate ----
  struct EvalArgs {
    std::string pred, gold, pred_labels = "weak", gold_labels = "gold", scheme;
    bool by_language = false, csv = false;
  };
  auto ea = std::make_shared<EvalArgs>();
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Span-level precision/recall/F1");
  evaluate->add_option("--pred", ea->pred, "predicted corpus")->required();
  evaluate->add_option("--gold", ea->gold, "gold corpus")->required();
  evaluate->add_option("--pred-labels", ea->pred_labels,
                       "predicted span slot: weak|gold");
  evaluate->add_option("--gold-labels", ea->gold_labels,
                       "gold span slot: weak|gold");
  evaluate->add_option("--scheme", ea->scheme, "comma-separated entity types");
  evaluate->add_flag("--by-language", ea->by_language,
                     "break results down by origin language");
  evaluate->add_flag("--csv", ea->csv, "CSV instead of aligned table");
  evaluate->callback([ea, &out] {
    TagScheme scheme = scheme_from_flag(ea->scheme);
    LabelSource ps = label_source_from_string(ea->pred_labels);
    LabelSource gs = label_source_from_string(ea->gold_labels);
    Corpus pred = load_corpus(ea->pred, scheme, ps);
    Corpus gold = load_corpus(ea->gold, scheme, gs);
    if (ea->by_language) {
      auto rows = compare_by_language(pred, ps, gold, gs);
      out << (ea->csv ? language_csv(rows) : language_table(rows));
    } else {
      PRFReport report = span_prf(pred, ps, gold, gs);
      out << (ea->csv ? prf_csv(report) : prf_table(report));
    }
  });

  // ---- iaa ----
  struct IaaArgs {
    std::vector<std::string> in;
    std::string labels = "gold", scheme;
    bool csv = false;
  };
  auto ia = std::make_shared<IaaArgs>();
  CLI::App* iaa = app.add_subcommand(
      "iaa", "Pairwise inter-annotator agreement over aligned corpora");
  iaa->add_option("--in", ia->in, "two or more aligned annotation files")
      ->required()
      ->expected(2, -1);
  iaa->add_option("--labels", ia->labels, "span slot: gold|weak");
  iaa->add_option("--scheme", ia->scheme, "comma-separated entity types");
  iaa->add_flag("--csv", ia->csv, "CSV instead of aligned table");
  iaa->callback([ia, &out] {
    TagScheme scheme = scheme_from_flag(ia->scheme);
    LabelSource src = label_source_from_string(ia->labels);
    std::vector<Corpus> corpora;
    corpora.reserve(ia->in.size());
    for (const std::string& path : ia->in)
      corpora.push_back(load_corpus(path, scheme, src));
    std::vector<SpanSource> annotations;
    for (const Corpus& c : corpora) annotations.push_back({&c, src});
    AgreementReport report = pairwise_agreement(annotations);
    out << (ia->csv ? agreement_csv(report) : agreement_table(report));
  });

  // ---- experiment ----
  struct ExperimentArgs {
    std::string spec, out_dir;
    bool quiet = false;
  };
  auto xa = std::make_shared<ExperimentArgs>();
  CLI::App* experiment = app.add_subcommand(
      "experiment", "Resumable backbone/size sweep with CSV and plots");
  experiment->add_option("--spec", xa->spec, "experiment spec (json)")
      ->required();
  experiment->add_option("--out-dir", xa->out_dir, "artifact directory")
      ->required();
  experiment->add_flag("--quiet", xa->quiet, "suppress per-cell progress");
  experiment->callback([xa, &out, &err] {
    ExperimentSpecFile spec = read_experiment_spec(xa->spec);
    TagScheme scheme = spec.scheme_types.empty()
                           ? TagScheme::outbreak_news()
                           : TagScheme::of(spec.scheme_types);
    TagScheme ood_scheme = spec.ood_scheme_types.empty()
                               ? scheme
                               : TagScheme::of(spec.ood_scheme_types);
    Corpus indomain_weak =
        load_corpus(spec.indomain_weak_path, scheme, LabelSource::weak);
    Corpus strong = load_corpus(spec.strong_path, scheme, LabelSource::gold);
    Corpus eval = load_corpus(spec.eval_path, scheme, LabelSource::gold);
    Corpus ood_weak;
    ExperimentData data;
    if (!spec.ood_weak_path.empty()) {
      ood_weak =
          load_corpus(spec.ood_weak_path, ood_scheme, LabelSource::weak);
      data.ood_weak = &ood_weak;
    }
    data.indomain_weak = &indomain_weak;
    data.strong_train = &strong;
    data.eval = &eval;
    data.dims = spec.dims;
    data.config = spec.config;
    data.strong_epochs = spec.strong_epochs;
    if (!spec.gazetteers_path.empty())
      data.augment.gazetteers = read_gazetteers(spec.gazetteers_path);
    data.augment.drop_rate = spec.drop_rate;
    data.augment.replace_prob = spec.replace_prob;

    ProgressFn progress;
    if (!xa->quiet)
      progress = [&err](const std::string& msg) { err << msg << std::endl; };
    ExperimentReport report =
        run_experiment(spec.grid, data, xa->out_dir, progress);
    out << summary_csv(parse_results_csv(results_csv(report.rows)));
    out << "wrote:\n";
    for (const std::string& artifact : report.artifacts)
      out << "  " << artifact << "\n";
  });

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("wsner");
  for (const std::string& a : args) argv_storage.push_back(a);
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run 'wsner --help' for usage\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace wsner
