// Command-line front end: synthetic data generation, tier-map computation,
// experiment runs, diversity tables across runs, and report re-emission.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qfi/config.hpp"
#include "qfi/dataset.hpp"
#include "qfi/diversity.hpp"
#include "qfi/experiment.hpp"
#include "qfi/tiers.hpp"

namespace fs = std::filesystem;

namespace {

nlohmann::json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw qfi::IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw qfi::IngestionError(path.string() + ": " + e.what());
  }
  return j;
}

void cmd_synth(std::size_t rows, std::size_t features, std::size_t informative,
               std::uint64_t seed, const std::string& out) {
  const qfi::Dataset ds = qfi::synth_dataset(rows, features, informative, seed);
  qfi::save_dataset(ds, out);
  std::cout << "wrote " << out << " (" << ds.n_rows() << " rows, " << ds.n_features()
            << " features)\n";
}

void cmd_tier(const std::string& data_path, int tier_size, const std::string& out) {
  const qfi::Dataset ds = qfi::load_dataset(data_path);
  const std::vector<int> ordering = qfi::rank_by_label_correlation(ds.X, ds.y);
  const qfi::TierAssignment assignment =
      qfi::assign_tiers(ordering, static_cast<int>(ds.n_features()), tier_size);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw qfi::IoError("cannot open " + out + " for writing");
  file << qfi::tier_map_to_csv(assignment, ds.feature_names);
  std::cout << "wrote " << out << " (" << assignment.tiers.size() << " tiers)\n";
}

void print_run_summary(const qfi::RunReport& report) {
  for (const auto& tier : report.primary.tiers)
    std::cout << "tier " << tier.tier_id << ": "
              << qfi::format_metrics_row(tier.metrics) << "\n";
  std::cout << report.primary.model_id
            << " aggregate accuracy: " << report.primary.aggregate_accuracy << "\n";
  if (report.diversity.primary.triple)
    std::cout << report.primary.model_id << " diversity: " << *report.diversity.primary.triple
              << "\n";
  if (report.diversity.classical && report.diversity.classical->triple)
    std::cout << report.diversity.classical->model
              << " diversity: " << *report.diversity.classical->triple << "\n";
}

// Writes each tier's train kernel as a QKM1 binary so later runs can reuse
// them. Only meaningful for the kernel model.
void save_tier_kernels(const qfi::ExperimentConfig& cfg, const qfi::Dataset& ds,
                       const std::optional<qfi::TierAssignment>& tiers,
                       const fs::path& out_dir) {
  const qfi::PreparedData prepared = qfi::prepare_experiment_data(cfg, ds, tiers);
  std::error_code ec;
  fs::create_directories(out_dir / "kernels", ec);
  if (ec) throw qfi::IoError("cannot create " + (out_dir / "kernels").string());
  for (std::size_t t = 0; t < prepared.assignment.tiers.size(); ++t) {
    const qfi::Matrix cols = prepared.X_train.select_columns(prepared.assignment.tiers[t]);
    const qfi::FeatureMapSpec fm{static_cast<int>(cols.cols()), cfg.reps};
    const qfi::KernelMatrix K = qfi::train_kernel_matrix(cols, fm);
    qfi::save_kernel(K, out_dir / "kernels" / ("tier_" + std::to_string(t) + ".qkm"));
  }
}

void cmd_run(const std::string& data_path, const std::string& out_dir,
             const qfi::ExperimentConfig& cfg, const std::optional<std::string>& sme_path,
             const std::optional<std::string>& tiers_path, bool save_kernels) {
  const qfi::Dataset ds = qfi::load_dataset(data_path);

  std::optional<std::map<std::string, int>> sme;
  if (sme_path) {
    sme = qfi::load_sme_ranks(*sme_path);
    const std::size_t unmatched = qfi::sme_unmatched_count(ds.feature_names, *sme);
    if (unmatched > 0)
      std::cerr << "warning: " << unmatched
                << " SME rank entr" << (unmatched == 1 ? "y" : "ies")
                << " match no dataset feature and will be dropped\n";
  }

  std::optional<qfi::TierAssignment> tiers;
  if (tiers_path) {
    std::ifstream in(*tiers_path, std::ios::binary);
    if (!in) throw qfi::IoError("cannot open " + *tiers_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    tiers = qfi::tier_map_from_csv(buffer.str(), ds.feature_names);
  }

  const qfi::RunReport report = qfi::run_experiment(cfg, ds, sme, tiers);
  qfi::emit_report(report, out_dir);
  if (save_kernels) {
    if (cfg.model != qfi::ModelKind::Qsvc)
      throw qfi::ValidationError("--save_kernels applies only to the qsvc model");
    save_tier_kernels(cfg, ds, tiers, out_dir);
  }
  print_run_summary(report);
  std::cout << "report written to " << out_dir << "\n";
}

void cmd_diversity(const std::vector<std::string>& report_paths,
                   const std::optional<std::string>& sme_path, const std::string& out) {
  if (report_paths.empty()) throw qfi::ValidationError("need at least one --report");
  std::vector<qfi::RunReport> reports;
  for (const auto& p : report_paths) reports.push_back(qfi::report_from_json(load_json_file(p)));
  for (const auto& r : reports)
    if (r.feature_names != reports[0].feature_names)
      throw qfi::ValidationError("reports describe different feature sets");

  const auto n = static_cast<int>(reports[0].feature_names.size());
  const long long max_diff = n >= 2 ? qfi::max_rank_diff(n) : 0;

  std::optional<qfi::RankVector> sme;
  if (sme_path)
    sme = qfi::sme_rank_vector(reports[0].feature_names, qfi::load_sme_ranks(*sme_path));
  else if (reports[0].sme)
    sme = reports[0].sme;

  const auto build_entry = [&](const qfi::ModelRunResult& run,
                               const qfi::ModelRunResult* counterpart,
                               qfi::RankSource side) {
    qfi::DiversityEntry e;
    e.model = run.model_id;
    e.accuracy = run.aggregate_accuracy;
    e.variance = run.variance;
    if (counterpart && max_diff > 0)
      e.vs_counterpart = qfi::pct_rank_diff(run.ranks, counterpart->ranks, max_diff);
    if (sme && max_diff > 0) e.vs_sme = qfi::pct_rank_diff(run.ranks, *sme, max_diff);
    if (e.vs_counterpart && e.vs_sme) {
      e.rank_diff_avg = 0.5 * (*e.vs_counterpart + *e.vs_sme);
      e.triple = qfi::format_triple({e.accuracy, *e.rank_diff_avg, e.variance, side});
    }
    return e;
  };

  nlohmann::json models = nlohmann::json::array();
  const qfi::ModelRunResult* first_baseline = nullptr;
  for (const auto& r : reports) {
    const qfi::ModelRunResult* baseline = r.baseline ? &*r.baseline : nullptr;
    if (!first_baseline && baseline) first_baseline = baseline;
    const qfi::RankSource side = r.config.model == qfi::ModelKind::Gbdt
                                     ? qfi::RankSource::Classical
                                     : qfi::RankSource::Quantum;
    models.push_back(qfi::diversity_entry_to_json(build_entry(r.primary, baseline, side)));
  }
  nlohmann::json j;
  j["models"] = std::move(models);
  // the classical row pairs with the first report's primary model
  j["classical"] = first_baseline
                       ? qfi::diversity_entry_to_json(build_entry(
                             *first_baseline, &reports[0].primary, qfi::RankSource::Classical))
                       : nlohmann::json(nullptr);

  std::ofstream file(out, std::ios::binary);
  if (!file) throw qfi::IoError("cannot open " + out + " for writing");
  file << j.dump(2) << "\n";
  std::cout << "wrote " << out << "\n";
}

void cmd_report(const std::string& in_path, const std::string& out_dir) {
  const qfi::RunReport report = qfi::report_from_json(load_json_file(in_path));
  qfi::emit_report(report, out_dir);
  std::cout << "report re-emitted to " << out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum/classical feature-importance pipeline"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  std::size_t synth_rows = 4000, synth_features = 146, synth_informative = 30;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--rows", synth_rows, "number of rows");
  synth->add_option("--features", synth_features, "number of feature columns");
  synth->add_option("--informative", synth_informative, "number of informative features");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  // tier
  auto* tier = app.add_subcommand("tier", "compute a correlation tier map");
  std::string tier_data, tier_out;
  int tier_size = 10;
  tier->add_option("--data", tier_data, "dataset CSV")->required();
  tier->add_option("--tier_size", tier_size, "features per tier");
  tier->add_option("--out", tier_out, "output tier map CSV")->required();

  // run
  auto* run = app.add_subcommand("run", "run a feature-importance experiment");
  std::string run_data, run_out, run_config, run_sme, run_tiers;
  std::string run_model, run_explainer;
  int run_tier_size = 0, run_reps = 0, run_n_repeats = 0, run_ale_intervals = 0;
  int run_spsa = 0, run_max_rows = -1;
  double run_fraction = 0.0, run_c = 0.0;
  std::uint64_t run_seed = 0;
  bool run_parallel = false, run_untiered = false;
  run->add_option("--data", run_data, "dataset CSV")->required();
  run->add_option("--out", run_out, "output directory")->required();
  run->add_option("--config", run_config, "key = value config file");
  run->add_option("--sme", run_sme, "SME rank CSV (feature_name,rank)");
  run->add_option("--tiers", run_tiers, "external tier map CSV");
  run->add_option("--model", run_model, "qsvc | vqc | gbdt");
  run->add_option("--explainer", run_explainer, "pi | ale");
  run->add_option("--tier_size", run_tier_size, "features per tier");
  run->add_option("--reps", run_reps, "feature map repetitions");
  run->add_option("--n_repeats_pi", run_n_repeats, "permutation repeats");
  run->add_option("--ale_intervals", run_ale_intervals, "ALE quantile intervals");
  run->add_option("--train_fraction", run_fraction, "train split fraction");
  run->add_option("--C", run_c, "SVC regularization");
  run->add_option("--spsa_iterations", run_spsa, "SPSA iteration count");
  run->add_option("--seed", run_seed, "experiment seed");
  run->add_flag("--parallel", run_parallel, "run tiers on a worker pool");
  run->add_option("--max_rows", run_max_rows, "subsampling cap (0 = none)");
  run->add_flag("--untiered", run_untiered, "gbdt only: single tier with all features");
  bool run_save_kernels = false;
  run->add_flag("--save_kernels", run_save_kernels,
                "also write per-tier train kernels as QKM1 binaries (qsvc only)");

  // diversity
  auto* diversity = app.add_subcommand("diversity", "diversity table across run reports");
  std::vector<std::string> div_reports;
  std::string div_sme, div_out;
  diversity->add_option("--report", div_reports, "report.json path (repeatable)")->required();
  diversity->add_option("--sme", div_sme, "SME rank CSV");
  diversity->add_option("--out", div_out, "output JSON path")->required();

  // report
  auto* report = app.add_subcommand("report", "re-emit artifacts from a report.json");
  std::string report_in, report_out;
  report->add_option("--in", report_in, "existing report.json")->required();
  report->add_option("--out", report_out, "output directory")->required();

  try {
    app.parse(argc, argv);

    if (*synth) {
      cmd_synth(synth_rows, synth_features, synth_informative, synth_seed, synth_out);
    } else if (*tier) {
      cmd_tier(tier_data, tier_size, tier_out);
    } else if (*run) {
      qfi::ExperimentConfig cfg;
      if (run->count("--config")) cfg = qfi::load_config(run_config);
      if (run->count("--model")) cfg.model = qfi::model_kind_from_name(run_model);
      if (run->count("--explainer"))
        cfg.explainer = qfi::explainer_kind_from_name(run_explainer);
      if (run->count("--tier_size")) cfg.tier_size = run_tier_size;
      if (run->count("--reps")) cfg.reps = run_reps;
      if (run->count("--n_repeats_pi")) cfg.n_repeats_pi = run_n_repeats;
      if (run->count("--ale_intervals")) cfg.ale_intervals = run_ale_intervals;
      if (run->count("--train_fraction")) cfg.train_fraction = run_fraction;
      if (run->count("--C")) cfg.C = run_c;
      if (run->count("--spsa_iterations")) cfg.spsa_iterations = run_spsa;
      if (run->count("--seed")) cfg.seed = run_seed;
      if (run->count("--parallel")) cfg.parallel = run_parallel;
      if (run->count("--max_rows")) cfg.max_rows = run_max_rows;
      if (run->count("--untiered")) cfg.untiered = run_untiered;
      qfi::validate_config(cfg);
      cmd_run(run_data, run_out, cfg,
              run->count("--sme") ? std::optional<std::string>(run_sme) : std::nullopt,
              run->count("--tiers") ? std::optional<std::string>(run_tiers) : std::nullopt,
              run_save_kernels);
    } else if (*diversity) {
      cmd_diversity(div_reports,
                    diversity->count("--sme") ? std::optional<std::string>(div_sme)
                                              : std::nullopt,
                    div_out);
    } else if (*report) {
      cmd_report(report_in, report_out);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const qfi::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
