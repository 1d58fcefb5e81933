#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfi/config.hpp"
#include "qfi/dataset.hpp"
#include "qfi/diversity.hpp"
#include "qfi/ensemble.hpp"
#include "qfi/errors.hpp"
#include "qfi/gbdt.hpp"
#include "qfi/parallel.hpp"
#include "qfi/prng.hpp"
#include "qfi/qkernel.hpp"
#include "qfi/qsvc.hpp"
#include "qfi/tiers.hpp"
#include "qfi/vqc.hpp"
#include "qfi/xai.hpp"

namespace qfi {

struct TierRunResult {
  int tier_id = 0;
  std::vector<int> features;  // global feature indices, tier order
  Metrics metrics;
  std::vector<double> raw_importance;
};

struct ModelRunResult {
  std::string model_id;  // e.g. "qsvc+pi"
  std::vector<TierRunResult> tiers;
  GlobalImportance importance;
  double aggregate_accuracy = 0.0;
  RankVector ranks;
  double variance = 0.0;
};

struct DiversityEntry {
  std::string model;
  double accuracy = 0.0;
  double variance = 0.0;
  std::optional<double> rank_diff_avg;
  std::optional<std::string> triple;
  std::optional<double> vs_counterpart;  // quantum vs classical (symmetric, Eq-16 style)
  std::optional<double> vs_sme;
};

struct DiversitySection {
  DiversityEntry primary;
  std::optional<DiversityEntry> classical;
};

struct TierWindow {
  int tier_id = 0;
  double start_ms = 0.0;  // offset from run start
  double end_ms = 0.0;
};

struct RunTiming {
  std::int64_t started_unix_ms = 0;
  double total_ms = 0.0;
  std::vector<TierWindow> primary_tiers;
  std::vector<TierWindow> baseline_tiers;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<std::string> feature_names;
  TierAssignment assignment;
  std::size_t n_rows_used = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  ModelRunResult primary;
  std::optional<ModelRunResult> baseline;
  std::optional<RankVector> sme;
  DiversitySection diversity;
  RunTiming timing;
};

namespace detail {

inline constexpr std::uint64_t kSubsampleStream = 0x535542;
inline constexpr std::uint64_t kSplitStream = 0x53504C;
inline constexpr std::uint64_t kPrimaryStream = 0x505249;
inline constexpr std::uint64_t kBaselineStream = 0x424153;
inline constexpr std::uint64_t kTierFitStream = 0x464954;
inline constexpr std::uint64_t kTierPiStream = 0x5049;

struct TierData {
  Matrix X_train;
  Matrix X_test;
  const std::vector<int>& y_train;
  const std::vector<int>& y_test;
};

struct TierOutcome {
  Metrics metrics;
  std::vector<double> raw_importance;
};

inline std::vector<double> explain_tier(ExplainerKind explainer, const ScoreFn& score_fn,
                                        const PredictFn& predict_fn, const TierData& data,
                                        const ExperimentConfig& cfg, std::uint64_t tier_seed,
                                        const std::string& model_id) {
  if (explainer == ExplainerKind::Pi) {
    return permutation_importance(score_fn, data.X_test, data.y_test, cfg.n_repeats_pi,
                                  derive_seed(tier_seed, kTierPiStream), model_id)
        .scores;
  }
  std::vector<double> scores(data.X_test.cols());
  for (std::size_t j = 0; j < data.X_test.cols(); ++j)
    scores[j] =
        ale_importance(ale_curve(predict_fn, data.X_test, static_cast<int>(j), cfg.ale_intervals));
  return scores;
}

inline TierOutcome run_tier_experiment(ModelKind model, ExplainerKind explainer,
                                       const TierData& data, const ExperimentConfig& cfg,
                                       std::uint64_t tier_seed) {
  const std::string model_id =
      model_kind_name(model) + std::string("+") + explainer_kind_name(explainer);
  TierOutcome outcome;
  switch (model) {
    case ModelKind::Qsvc: {
      const FeatureMapSpec fm{static_cast<int>(data.X_train.cols()), cfg.reps};
      const KernelMatrix K = train_kernel_matrix(data.X_train, fm);
      const SvcModel svc = fit_precomputed(K, data.y_train, cfg.C);
      const KernelMatrix K_test = cross_kernel_matrix(data.X_test, data.X_train, fm);
      outcome.metrics = compute_metrics(predict(svc, K_test), data.y_test);
      // the explainers re-derive cross-kernel columns against the stored
      // training data for every perturbed dataset
      const ScoreFn score = [&](const Matrix& Xq, const std::vector<int>& yq) {
        return compute_metrics(predict(svc, cross_kernel_matrix(Xq, data.X_train, fm)), yq)
            .accuracy;
      };
      const PredictFn decision = [&](const Matrix& Xq) {
        return decision_function(svc, cross_kernel_matrix(Xq, data.X_train, fm));
      };
      outcome.raw_importance =
          explain_tier(explainer, score, decision, data, cfg, tier_seed, model_id);
      break;
    }
    case ModelKind::Vqc: {
      VqcSpec spec;
      spec.feature_map = FeatureMapSpec{static_cast<int>(data.X_train.cols()), cfg.reps};
      spec.ansatz_reps = cfg.reps;
      spec.max_iterations = cfg.spsa_iterations;
      spec.seed = derive_seed(tier_seed, kTierFitStream);
      const VqcModel vqc = vqc_fit(data.X_train, data.y_train, spec);
      outcome.metrics = compute_metrics(vqc_predict(vqc, data.X_test), data.y_test);
      const ScoreFn score = [&](const Matrix& Xq, const std::vector<int>& yq) {
        return compute_metrics(vqc_predict(vqc, Xq), yq).accuracy;
      };
      const PredictFn proba = [&](const Matrix& Xq) { return vqc_predict_proba(vqc, Xq); };
      outcome.raw_importance =
          explain_tier(explainer, score, proba, data, cfg, tier_seed, model_id);
      break;
    }
    case ModelKind::Gbdt: {
      const GbdtModel tree_model = gbdt_fit(data.X_train, data.y_train);
      outcome.metrics = compute_metrics(gbdt_predict(tree_model, data.X_test), data.y_test);
      const ScoreFn score = [&](const Matrix& Xq, const std::vector<int>& yq) {
        return compute_metrics(gbdt_predict(tree_model, Xq), yq).accuracy;
      };
      const PredictFn proba = [&](const Matrix& Xq) {
        return gbdt_predict_proba(tree_model, Xq);
      };
      outcome.raw_importance =
          explain_tier(explainer, score, proba, data, cfg, tier_seed, model_id);
      break;
    }
  }
  return outcome;
}

inline ModelRunResult run_model_pipeline(
    ModelKind model, ExplainerKind explainer, const TierAssignment& assignment,
    const Matrix& X_train, const std::vector<int>& y_train, const Matrix& X_test,
    const std::vector<int>& y_test, const ExperimentConfig& cfg, std::uint64_t model_stream,
    RankSource rank_source, std::vector<TierWindow>& windows,
    std::chrono::steady_clock::time_point run_start) {
  const std::size_t n_tiers = assignment.tiers.size();
  std::vector<TierRunResult> tier_results(n_tiers);
  windows.assign(n_tiers, {});

  const auto elapsed_ms = [run_start](std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double, std::milli>(t - run_start).count();
  };
  parallel_for(
      n_tiers,
      [&](std::size_t t) {
        const auto tier_start = std::chrono::steady_clock::now();
        const auto& features = assignment.tiers[t];
        const TierData data{X_train.select_columns(features), X_test.select_columns(features),
                            y_train, y_test};
        TierOutcome outcome;
        try {
          outcome = run_tier_experiment(model, explainer, data, cfg,
                                        derive_seed(cfg.seed, model_stream, t));
        } catch (const ValidationError& e) {
          throw ValidationError("tier " + std::to_string(t) + ": " + e.what());
        } catch (const RuntimeFailure& e) {
          throw RuntimeFailure("tier " + std::to_string(t) + ": " + e.what());
        }
        tier_results[t] = TierRunResult{static_cast<int>(t), features, outcome.metrics,
                                        std::move(outcome.raw_importance)};
        windows[t] = TierWindow{static_cast<int>(t), elapsed_ms(tier_start),
                                elapsed_ms(std::chrono::steady_clock::now())};
      },
      cfg.parallel ? default_thread_count() : 1);

  const std::string model_id =
      model_kind_name(model) + std::string("+") + explainer_kind_name(explainer);
  std::vector<TierResult> ensemble_inputs;
  ensemble_inputs.reserve(n_tiers);
  for (const TierRunResult& r : tier_results) {
    ImportanceVector iv;
    iv.scores = r.raw_importance;
    iv.method = explainer == ExplainerKind::Pi ? ExplainerMethod::PI : ExplainerMethod::ALE;
    iv.model_id = model_id;
    ensemble_inputs.push_back(TierResult{r.tier_id, r.metrics.accuracy, std::move(iv), r.metrics});
  }
  auto [global, aggregate_accuracy] = aggregate_tiers(ensemble_inputs, assignment);

  ModelRunResult result;
  result.model_id = model_id;
  result.tiers = std::move(tier_results);
  result.ranks = rank_features(global, rank_source);
  result.variance = importance_variance(global.scores);
  result.importance = std::move(global);
  result.aggregate_accuracy = aggregate_accuracy;
  return result;
}

inline std::vector<int> stratified_subsample(std::span<const int> y, std::size_t target,
                                             std::uint64_t seed) {
  std::vector<int> class_rows[2];
  for (std::size_t i = 0; i < y.size(); ++i)
    class_rows[y[i] == 1 ? 1 : 0].push_back(static_cast<int>(i));
  const double fraction = static_cast<double>(target) / static_cast<double>(y.size());
  long long quota[2];
  double remainder[2];
  long long assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = fraction * static_cast<double>(class_rows[c].size());
    quota[c] = static_cast<long long>(exact);
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  while (assigned < static_cast<long long>(target)) {
    const int c = remainder[0] >= remainder[1] ? 0 : 1;
    ++quota[c];
    remainder[c] = -1.0;
    ++assigned;
  }
  std::vector<int> picked;
  for (int c = 0; c < 2; ++c) {
    quota[c] = std::min<long long>(quota[c], static_cast<long long>(class_rows[c].size()));
    Rng rng(derive_seed(seed, kSubsampleStream, static_cast<std::uint64_t>(c)));
    std::vector<int> rows = class_rows[c];
    rng.shuffle(rows);
    for (long long i = 0; i < quota[c]; ++i) picked.push_back(rows[static_cast<std::size_t>(i)]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace detail

// Subsampled, split, scaled and tiered view of a dataset — everything the
// per-tier model fits consume. Deterministic given (config, dataset).
struct PreparedData {
  Matrix X_train;
  Matrix X_test;
  std::vector<int> y_train;
  std::vector<int> y_test;
  TierAssignment assignment;
  std::size_t n_rows_used = 0;
};

inline PreparedData prepare_experiment_data(
    const ExperimentConfig& cfg, const Dataset& dataset,
    const std::optional<TierAssignment>& tier_override = {}) {
  validate_config(cfg);
  if (dataset.n_rows() < 2) throw ValidationError("dataset needs at least 2 rows");
  if (dataset.y.size() != dataset.n_rows())
    throw ValidationError("dataset labels do not match row count");

  PreparedData prepared;

  // optional subsampling cap, the single knob for constrained-budget runs
  Matrix X = dataset.X;
  std::vector<int> y = dataset.y;
  if (cfg.max_rows > 0 && static_cast<std::size_t>(cfg.max_rows) < dataset.n_rows()) {
    const std::vector<int> keep =
        detail::stratified_subsample(dataset.y, static_cast<std::size_t>(cfg.max_rows), cfg.seed);
    X = dataset.X.select_rows(keep);
    y.clear();
    for (const int r : keep) y.push_back(dataset.y[static_cast<std::size_t>(r)]);
  }
  prepared.n_rows_used = X.rows();

  const TrainTestSplit parts =
      split(X, y, cfg.train_fraction, derive_seed(cfg.seed, detail::kSplitStream));
  const Matrix X_train_raw = X.select_rows(parts.train_indices);
  const Matrix X_test_raw = X.select_rows(parts.test_indices);
  for (const int r : parts.train_indices)
    prepared.y_train.push_back(y[static_cast<std::size_t>(r)]);
  for (const int r : parts.test_indices)
    prepared.y_test.push_back(y[static_cast<std::size_t>(r)]);

  const ScalingParams scaling = fit_scaling(X_train_raw);
  prepared.X_train = apply_scaling(scaling, X_train_raw);
  prepared.X_test = apply_scaling(scaling, X_test_raw);

  const std::size_t d = dataset.n_features();
  if (tier_override) {
    if (tier_override->tier_of.size() != d)
      throw ValidationError("tier map covers " + std::to_string(tier_override->tier_of.size()) +
                            " features, dataset has " + std::to_string(d));
    prepared.assignment = *tier_override;
  } else {
    const int tier_size = (cfg.model == ModelKind::Gbdt && cfg.untiered)
                              ? static_cast<int>(d)
                              : cfg.tier_size;
    prepared.assignment = assign_tiers(rank_by_label_correlation(prepared.X_train, prepared.y_train),
                                       static_cast<int>(d), tier_size);
  }
  return prepared;
}

// Full pipeline: subsample -> split -> scale -> tier -> per-tier model +
// explainer -> reward/normalize aggregation -> ranking -> diversity against
// the classical baseline (and SME ranks when given). Per-tier jobs run
// serially or on a worker pool per cfg.parallel with identical results.
inline RunReport run_experiment(const ExperimentConfig& cfg, const Dataset& dataset,
                                const std::optional<std::map<std::string, int>>& sme_ranks = {},
                                const std::optional<TierAssignment>& tier_override = {}) {
  const auto run_start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = cfg;
  report.feature_names = dataset.feature_names;
  report.timing.started_unix_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                      std::chrono::system_clock::now().time_since_epoch())
                                      .count();

  PreparedData prepared = prepare_experiment_data(cfg, dataset, tier_override);
  report.n_rows_used = prepared.n_rows_used;
  report.n_train = prepared.y_train.size();
  report.n_test = prepared.y_test.size();
  report.assignment = prepared.assignment;
  const Matrix& X_train = prepared.X_train;
  const Matrix& X_test = prepared.X_test;
  const std::vector<int>& y_train = prepared.y_train;
  const std::vector<int>& y_test = prepared.y_test;

  const RankSource primary_source =
      cfg.model == ModelKind::Gbdt ? RankSource::Classical : RankSource::Quantum;
  report.primary = detail::run_model_pipeline(
      cfg.model, cfg.explainer, report.assignment, X_train, y_train, X_test, y_test, cfg,
      detail::kPrimaryStream, primary_source, report.timing.primary_tiers, run_start);

  if (cfg.model != ModelKind::Gbdt) {
    report.baseline = detail::run_model_pipeline(
        ModelKind::Gbdt, ExplainerKind::Pi, report.assignment, X_train, y_train, X_test, y_test,
        cfg, detail::kBaselineStream, RankSource::Classical, report.timing.baseline_tiers,
        run_start);
  }

  if (sme_ranks) report.sme = sme_rank_vector(dataset.feature_names, *sme_ranks);

  const std::size_t d = dataset.n_features();
  const long long mdiff = d >= 2 ? max_rank_diff(static_cast<int>(d)) : 0;
  DiversityEntry primary_entry;
  primary_entry.model = report.primary.model_id;
  primary_entry.accuracy = report.primary.aggregate_accuracy;
  primary_entry.variance = report.primary.variance;
  if (report.baseline && mdiff > 0)
    primary_entry.vs_counterpart =
        pct_rank_diff(report.primary.ranks, report.baseline->ranks, mdiff);
  if (report.sme && mdiff > 0)
    primary_entry.vs_sme = pct_rank_diff(report.primary.ranks, *report.sme, mdiff);
  if (primary_entry.vs_counterpart && primary_entry.vs_sme) {
    primary_entry.rank_diff_avg = 0.5 * (*primary_entry.vs_counterpart + *primary_entry.vs_sme);
    primary_entry.triple = format_triple({primary_entry.accuracy, *primary_entry.rank_diff_avg,
                                          primary_entry.variance, primary_source});
  }
  report.diversity.primary = std::move(primary_entry);

  if (report.baseline) {
    DiversityEntry classical_entry;
    classical_entry.model = report.baseline->model_id;
    classical_entry.accuracy = report.baseline->aggregate_accuracy;
    classical_entry.variance = report.baseline->variance;
    // classical-vs-quantum equals quantum-vs-classical by symmetry
    classical_entry.vs_counterpart = report.diversity.primary.vs_counterpart;
    if (report.sme && mdiff > 0)
      classical_entry.vs_sme = pct_rank_diff(report.baseline->ranks, *report.sme, mdiff);
    if (classical_entry.vs_counterpart && classical_entry.vs_sme) {
      classical_entry.rank_diff_avg =
          0.5 * (*classical_entry.vs_counterpart + *classical_entry.vs_sme);
      classical_entry.triple =
          format_triple({classical_entry.accuracy, *classical_entry.rank_diff_avg,
                         classical_entry.variance, RankSource::Classical});
    }
    report.diversity.classical = std::move(classical_entry);
  }

  report.timing.total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - run_start)
          .count();
  return report;
}

// ---- JSON serialization ----------------------------------------------------

inline nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"f1", m.f1}, {"recall", m.recall},
          {"precision", m.precision}};
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  j.at("accuracy").get_to(m.accuracy);
  j.at("f1").get_to(m.f1);
  j.at("recall").get_to(m.recall);
  j.at("precision").get_to(m.precision);
  return m;
}

inline nlohmann::json model_run_to_json(const ModelRunResult& run) {
  nlohmann::json tiers = nlohmann::json::array();
  for (const TierRunResult& t : run.tiers)
    tiers.push_back({{"tier_id", t.tier_id},
                     {"features", t.features},
                     {"metrics", metrics_to_json(t.metrics)},
                     {"raw_importance", t.raw_importance}});
  return {{"model_id", run.model_id},
          {"aggregate_accuracy", run.aggregate_accuracy},
          {"variance", run.variance},
          {"importance", run.importance.scores},
          {"rank_of", run.ranks.rank_of},
          {"rank_source", rank_source_name(run.ranks.source)},
          {"tiers", std::move(tiers)}};
}

inline ModelRunResult model_run_from_json(const nlohmann::json& j) {
  ModelRunResult run;
  j.at("model_id").get_to(run.model_id);
  j.at("aggregate_accuracy").get_to(run.aggregate_accuracy);
  j.at("variance").get_to(run.variance);
  j.at("importance").get_to(run.importance.scores);
  run.importance.provenance = run.model_id;
  j.at("rank_of").get_to(run.ranks.rank_of);
  const std::string source = j.at("rank_source").get<std::string>();
  run.ranks.source = source == "quantum"  ? RankSource::Quantum
                     : source == "classical" ? RankSource::Classical
                                             : RankSource::Sme;
  for (const auto& tj : j.at("tiers")) {
    TierRunResult t;
    tj.at("tier_id").get_to(t.tier_id);
    tj.at("features").get_to(t.features);
    t.metrics = metrics_from_json(tj.at("metrics"));
    tj.at("raw_importance").get_to(t.raw_importance);
    run.tiers.push_back(std::move(t));
  }
  return run;
}

inline nlohmann::json diversity_entry_to_json(const DiversityEntry& e) {
  nlohmann::json pairwise;
  pairwise["vs_classical"] =
      e.vs_counterpart ? nlohmann::json(*e.vs_counterpart) : nlohmann::json(nullptr);
  pairwise["vs_sme"] = e.vs_sme ? nlohmann::json(*e.vs_sme) : nlohmann::json(nullptr);
  return {{"model", e.model},
          {"accuracy", e.accuracy},
          {"variance", e.variance},
          {"rank_diff_avg", e.rank_diff_avg ? nlohmann::json(*e.rank_diff_avg)
                                            : nlohmann::json(nullptr)},
          {"triple_string", e.triple ? nlohmann::json(*e.triple) : nlohmann::json(nullptr)},
          {"pairwise", std::move(pairwise)}};
}

inline DiversityEntry diversity_entry_from_json(const nlohmann::json& j) {
  DiversityEntry e;
  j.at("model").get_to(e.model);
  j.at("accuracy").get_to(e.accuracy);
  j.at("variance").get_to(e.variance);
  if (!j.at("rank_diff_avg").is_null()) e.rank_diff_avg = j.at("rank_diff_avg").get<double>();
  if (!j.at("triple_string").is_null()) e.triple = j.at("triple_string").get<std::string>();
  const auto& pairwise = j.at("pairwise");
  if (!pairwise.at("vs_classical").is_null())
    e.vs_counterpart = pairwise.at("vs_classical").get<double>();
  if (!pairwise.at("vs_sme").is_null()) e.vs_sme = pairwise.at("vs_sme").get<double>();
  return e;
}

inline nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json j;
  j["config"] = config_to_json(report.config);
  j["dataset"] = {{"feature_names", report.feature_names},
                  {"n_rows_used", report.n_rows_used},
                  {"n_train", report.n_train},
                  {"n_test", report.n_test}};
  j["tiers"] = {{"tier_size", report.assignment.tier_size},
                {"assignment", report.assignment.tiers}};
  j["primary"] = model_run_to_json(report.primary);
  j["baseline"] =
      report.baseline ? model_run_to_json(*report.baseline) : nlohmann::json(nullptr);
  j["sme_rank_of"] =
      report.sme ? nlohmann::json(report.sme->rank_of) : nlohmann::json(nullptr);
  nlohmann::json diversity;
  diversity["primary"] = diversity_entry_to_json(report.diversity.primary);
  diversity["classical"] = report.diversity.classical
                               ? diversity_entry_to_json(*report.diversity.classical)
                               : nlohmann::json(nullptr);
  j["diversity"] = std::move(diversity);
  nlohmann::json primary_windows = nlohmann::json::array();
  for (const TierWindow& w : report.timing.primary_tiers)
    primary_windows.push_back(
        {{"tier_id", w.tier_id}, {"start_ms", w.start_ms}, {"end_ms", w.end_ms}});
  nlohmann::json baseline_windows = nlohmann::json::array();
  for (const TierWindow& w : report.timing.baseline_tiers)
    baseline_windows.push_back(
        {{"tier_id", w.tier_id}, {"start_ms", w.start_ms}, {"end_ms", w.end_ms}});
  j["timing"] = {{"started_unix_ms", report.timing.started_unix_ms},
                 {"total_ms", report.timing.total_ms},
                 {"primary_tiers", std::move(primary_windows)},
                 {"baseline_tiers", std::move(baseline_windows)}};
  return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
  RunReport report;
  report.config = config_from_json(j.at("config"));
  const auto& dataset = j.at("dataset");
  dataset.at("feature_names").get_to(report.feature_names);
  dataset.at("n_rows_used").get_to(report.n_rows_used);
  dataset.at("n_train").get_to(report.n_train);
  dataset.at("n_test").get_to(report.n_test);
  j.at("tiers").at("tier_size").get_to(report.assignment.tier_size);
  j.at("tiers").at("assignment").get_to(report.assignment.tiers);
  report.assignment.tier_of.assign(report.feature_names.size(), -1);
  for (std::size_t t = 0; t < report.assignment.tiers.size(); ++t)
    for (const int f : report.assignment.tiers[t])
      report.assignment.tier_of[static_cast<std::size_t>(f)] = static_cast<int>(t);
  report.primary = model_run_from_json(j.at("primary"));
  if (!j.at("baseline").is_null()) report.baseline = model_run_from_json(j.at("baseline"));
  if (!j.at("sme_rank_of").is_null()) {
    RankVector sme;
    j.at("sme_rank_of").get_to(sme.rank_of);
    sme.source = RankSource::Sme;
    report.sme = std::move(sme);
  }
  report.diversity.primary = diversity_entry_from_json(j.at("diversity").at("primary"));
  if (!j.at("diversity").at("classical").is_null())
    report.diversity.classical = diversity_entry_from_json(j.at("diversity").at("classical"));
  const auto& timing = j.at("timing");
  timing.at("started_unix_ms").get_to(report.timing.started_unix_ms);
  timing.at("total_ms").get_to(report.timing.total_ms);
  for (const auto& wj : timing.at("primary_tiers")) {
    TierWindow w;
    wj.at("tier_id").get_to(w.tier_id);
    wj.at("start_ms").get_to(w.start_ms);
    wj.at("end_ms").get_to(w.end_ms);
    report.timing.primary_tiers.push_back(w);
  }
  for (const auto& wj : timing.at("baseline_tiers")) {
    TierWindow w;
    wj.at("tier_id").get_to(w.tier_id);
    wj.at("start_ms").get_to(w.start_ms);
    wj.at("end_ms").get_to(w.end_ms);
    report.timing.baseline_tiers.push_back(w);
  }
  return report;
}

// ---- report emission --------------------------------------------------------

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string top10_csv(const ModelRunResult& run,
                             std::span<const std::string> feature_names) {
  // rank 1..10 by the model's own ranking (score desc, index asc)
  std::vector<int> by_rank(run.ranks.rank_of.size());
  for (std::size_t f = 0; f < run.ranks.rank_of.size(); ++f)
    by_rank[static_cast<std::size_t>(run.ranks.rank_of[f] - 1)] = static_cast<int>(f);
  std::string out = "feature_name,score\n";
  char buf[64];
  const std::size_t k = std::min<std::size_t>(10, by_rank.size());
  for (std::size_t i = 0; i < k; ++i) {
    const int f = by_rank[i];
    std::snprintf(buf, sizeof(buf), "%.17g",
                  run.importance.scores[static_cast<std::size_t>(f)]);
    out += feature_names[static_cast<std::size_t>(f)] + "," + buf + "\n";
  }
  return out;
}

}  // namespace detail

// Writes report.json, importance.csv, ranks.csv, diversity.json and
// plotdata/*.csv into out_dir. Emission is deterministic: the same report
// produces byte-identical files.
inline void emit_report(const RunReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "plotdata", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "plotdata").string() + ": " + ec.message());

  detail::write_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
  detail::write_file(out_dir / "importance.csv",
                     global_importance_to_csv(report.primary.importance, report.feature_names));

  std::string ranks = "feature_index,feature_name,primary_rank";
  if (report.baseline) ranks += ",classical_rank";
  if (report.sme) ranks += ",sme_rank";
  ranks += "\n";
  for (std::size_t f = 0; f < report.feature_names.size(); ++f) {
    ranks += std::to_string(f) + "," + report.feature_names[f] + "," +
             std::to_string(report.primary.ranks.rank_of[f]);
    if (report.baseline) ranks += "," + std::to_string(report.baseline->ranks.rank_of[f]);
    if (report.sme) ranks += "," + std::to_string(report.sme->rank_of[f]);
    ranks += "\n";
  }
  detail::write_file(out_dir / "ranks.csv", ranks);

  nlohmann::json diversity;
  diversity["primary"] = diversity_entry_to_json(report.diversity.primary);
  diversity["classical"] = report.diversity.classical
                               ? diversity_entry_to_json(*report.diversity.classical)
                               : nlohmann::json(nullptr);
  detail::write_file(out_dir / "diversity.json", diversity.dump(2) + "\n");

  detail::write_file(out_dir / "plotdata" / "top10_primary.csv",
                     detail::top10_csv(report.primary, report.feature_names));
  if (report.baseline)
    detail::write_file(out_dir / "plotdata" / "top10_baseline.csv",
                       detail::top10_csv(*report.baseline, report.feature_names));
}

}  // namespace qfi
