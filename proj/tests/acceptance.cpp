// Acceptance suite: one test per release criterion, each printed as a
// PASS/FAIL line. Criteria cover simulator-vs-oracle equivalence, kernel
// validity, SMO correctness, desk-scale model quality, the explainer
// contracts, aggregation and diversity arithmetic, end-to-end determinism,
// and cross-model ranking diversity.

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "qfi/experiment.hpp"
#include "qfi/prng.hpp"

using namespace qfi;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Circuit random_circuit(int n_qubits, int n_gates, Rng& rng) {
  Circuit c{n_qubits, {}};
  for (int g = 0; g < n_gates; ++g) {
    const int kind = static_cast<int>(rng.below(4));
    const int target = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_qubits)));
    switch (kind) {
      case 0: c.ops.push_back(GateOp::hadamard(target)); break;
      case 1: c.ops.push_back(GateOp::phase(target, rng.uniform(-kPi, kPi))); break;
      case 2: c.ops.push_back(GateOp::rot_y(target, rng.uniform(-kPi, kPi))); break;
      default: {
        if (n_qubits < 2) {
          c.ops.push_back(GateOp::hadamard(target));
          break;
        }
        int control = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_qubits)));
        while (control == target)
          control = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_qubits)));
        c.ops.push_back(GateOp::cnot(control, target));
        break;
      }
    }
  }
  return c;
}

TEST(Acceptance, C01_SimulatorMatchesDenseUnitaryOracle) {
  Stopwatch watch;
  Rng rng(10101);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const int gates = 1 + static_cast<int>(rng.below(30));
    const Circuit c = random_circuit(n, gates, rng);
    StateVector s = zero_state(n);
    for (auto& a : s.amplitudes) a = {rng.normal(), rng.normal()};
    const double norm = s.norm();
    for (auto& a : s.amplitudes) a /= norm;
    const StateVector fast = run_circuit(s, c);
    const StateVector slow = test::run_circuit_oracle(s, c);
    ASSERT_LT(test::max_abs_diff(fast, slow), 1e-10) << "trial " << trial;
  }
  EXPECT_LT(watch.seconds(), 10.0);
}

TEST(Acceptance, C02_KernelMatricesAreValidAndExact) {
  Stopwatch watch;
  Rng rng(20202);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(15);
    const int d = 2 + static_cast<int>(rng.below(3));
    const FeatureMapSpec spec{d, 3};
    Matrix X(n, static_cast<std::size_t>(d));
    for (auto& v : X.data()) v = rng.uniform(0.0, kScaleTarget);
    const KernelMatrix K = train_kernel_matrix(X, spec);

    Eigen::MatrixXd m(K.rows, K.cols);
    for (std::size_t i = 0; i < K.rows; ++i) {
      ASSERT_DOUBLE_EQ(K.at(i, i), 1.0);
      for (std::size_t j = 0; j < K.cols; ++j) {
        ASSERT_EQ(K.at(i, j), K.at(j, i));
        ASSERT_GE(K.at(i, j), 0.0 - 1e-12);
        ASSERT_LE(K.at(i, j), 1.0 + 1e-12);
        if (i != j) {
          ASSERT_EQ(K.at(i, j), kernel_entry(X.row(i), X.row(j), spec));
        }
        m(static_cast<long>(i), static_cast<long>(j)) = K.at(i, j);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    ASSERT_GE(solver.eigenvalues().minCoeff(), -1e-8);
  }
  EXPECT_LT(watch.seconds(), 60.0);
}

TEST(Acceptance, C03_SmoMatchesQuadraticProgramOracle) {
  Rng rng(30303);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.below(6);
    // well-conditioned random PSD kernel with a ridge
    KernelMatrix K;
    K.rows = K.cols = n;
    K.symmetric = true;
    K.values.assign(n * n, 0.0);
    std::vector<std::vector<double>> phi(n, std::vector<double>(n + 2));
    for (auto& row : phi)
      for (auto& v : row) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < n + 2; ++k) dot += phi[i][k] * phi[j][k];
        dot /= static_cast<double>(n + 2);
        if (i == j) dot += 0.5;
        K.at(i, j) = K.at(j, i) = dot;
      }
    std::vector<int> y01(n);
    bool pos = false, neg = false;
    for (auto& v : y01) {
      v = static_cast<int>(rng.below(2));
      (v ? pos : neg) = true;
    }
    if (!pos || !neg) y01[0] = 1 - y01[0];

    const SvcModel model = fit_precomputed(K, y01, 1.0);
    std::vector<double> alpha(n);
    double sum_ay = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      alpha[i] = model.dual_coefficients[i] * model.training_labels[i];
      sum_ay += alpha[i] * model.training_labels[i];
    }
    ASSERT_NEAR(sum_ay, 0.0, 1e-8);
    ASSERT_LT(test::kkt_violation(K, alpha, model.training_labels, 1.0), 1e-3);
    const auto oracle = test::solve_svm_dual_oracle(K, model.training_labels, 1.0, 30000);
    ASSERT_NEAR(dual_objective(K, alpha, model.training_labels), oracle.objective, 1e-4)
        << "trial " << trial;
  }
}

TEST(Acceptance, C04_DeskScaleQsvcAccuracy) {
  Stopwatch watch;
  const Dataset ds = synth_dataset(400, 4, 4, 7);
  ExperimentConfig cfg;
  cfg.model = ModelKind::Qsvc;
  cfg.explainer = ExplainerKind::Pi;
  cfg.tier_size = 4;
  cfg.reps = 2;
  cfg.C = 1.0;
  cfg.seed = 7;
  const RunReport report = run_experiment(cfg, ds);
  ASSERT_EQ(report.primary.tiers.size(), 1u);
  EXPECT_GE(report.primary.tiers[0].metrics.accuracy, 0.90);
  EXPECT_LT(watch.seconds(), 300.0);
}

TEST(Acceptance, C05_PermutationImportanceContract) {
  // Eq-1 walkthrough: baseline 0.80, permuted 0.60 -> importance 0.20 exactly
  Rng rng(50505);
  Matrix X(16, 3);
  for (auto& v : X.data()) v = rng.normal();
  X.fill_column(2, 1.5);  // constant column
  const Matrix original = X;
  const ScoreFn scorer = [&original](const Matrix& data, const std::vector<int>&) {
    return data == original ? 0.80 : 0.60;
  };
  const std::vector<int> y(16, 1);
  const ImportanceVector iv = permutation_importance(scorer, X, y, 5, 1, "walkthrough");
  EXPECT_DOUBLE_EQ(iv.scores[0], 0.20);
  EXPECT_DOUBLE_EQ(iv.scores[1], 0.20);
  EXPECT_DOUBLE_EQ(iv.scores[2], 0.0);  // constant column is permutation-invariant

  // a pure-noise feature on a feature-0-only model stays within sampling noise
  const std::size_t n = 500;
  Matrix data(n, 2);
  std::vector<int> labels(n);
  Rng data_rng(51515);
  for (std::size_t r = 0; r < n; ++r) {
    data(r, 0) = data_rng.normal();
    data(r, 1) = data_rng.normal();
    labels[r] = data(r, 0) > 0.0 ? 1 : 0;
  }
  const ScoreFn threshold_score = [](const Matrix& d, const std::vector<int>& t) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < d.rows(); ++r)
      hits += (d(r, 0) > 0.0 ? 1 : 0) == t[r] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(d.rows());
  };
  const ImportanceVector noise_iv =
      permutation_importance(threshold_score, data, labels, 5, 99, "threshold");
  EXPECT_LT(std::abs(noise_iv.scores[1]), 0.05);
}

TEST(Acceptance, C06_AleContract) {
  Rng rng(60606);
  // zero mean within 1e-8 on every produced curve
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 50 + rng.below(200);
    Matrix X(n, 3);
    for (auto& v : X.data()) v = rng.normal();
    const double w0 = rng.normal(), w1 = rng.normal();
    const PredictFn fn = [w0, w1](const Matrix& d) {
      std::vector<double> out(d.rows());
      for (std::size_t r = 0; r < d.rows(); ++r)
        out[r] = std::tanh(w0 * d(r, 0)) + w1 * d(r, 1) * d(r, 2);
      return out;
    };
    for (int j = 0; j < 3; ++j) {
      const AleCurve curve = ale_curve(fn, X, j, 10);
      double weighted = 0.0;
      for (std::size_t k = 0; k < curve.interval_counts.size(); ++k)
        weighted +=
            static_cast<double>(curve.interval_counts[k]) * curve.centered_effects[k + 1];
      ASSERT_NEAR(weighted / static_cast<double>(n), 0.0, 1e-8);
    }
  }

  // linear-model slope recovered within 1% on 1000 samples
  const std::size_t n = 1000;
  Matrix X(n, 2);
  for (std::size_t r = 0; r < n; ++r) {
    X(r, 0) = rng.uniform(0.0, 1.0);
    X(r, 1) = rng.normal();
  }
  const PredictFn linear = [](const Matrix& d) {
    std::vector<double> out(d.rows());
    for (std::size_t r = 0; r < d.rows(); ++r) out[r] = 3.0 * d(r, 0);
    return out;
  };
  const AleCurve curve = ale_curve(linear, X, 0, 10);
  const double slope = (curve.centered_effects.back() - curve.centered_effects.front()) /
                       (curve.interval_edges.back() - curve.interval_edges.front());
  EXPECT_NEAR(slope, 3.0, 0.03);

  // constant model -> identically zero curve
  const PredictFn constant = [](const Matrix& d) {
    return std::vector<double>(d.rows(), 42.0);
  };
  const AleCurve flat = ale_curve(constant, X, 0, 10);
  for (const double e : flat.centered_effects) ASSERT_DOUBLE_EQ(e, 0.0);
}

TEST(Acceptance, C07_AggregationContract) {
  // Eq-5 spot values
  EXPECT_DOUBLE_EQ(reward(2.0, 0.0), 3.0);  // 1.5 * v at accuracy 0
  EXPECT_NEAR(reward(1.0, 1.0), 3.137844777, 1e-8);

  // Eq-7 sum-to-one within 1e-9 on every aggregation
  Rng rng(70707);
  for (int trial = 0; trial < 20; ++trial) {
    const int n_features = 4 + static_cast<int>(rng.below(143));
    const int tier_size = 1 + static_cast<int>(rng.below(10));
    std::vector<int> ordering(static_cast<std::size_t>(n_features));
    std::iota(ordering.begin(), ordering.end(), 0);
    rng.shuffle(ordering);
    const TierAssignment assignment = assign_tiers(ordering, n_features, tier_size);
    std::vector<TierResult> results;
    for (std::size_t t = 0; t < assignment.tiers.size(); ++t) {
      TierResult r;
      r.tier_id = static_cast<int>(t);
      r.model_accuracy = rng.next_double();
      r.importance.scores.resize(assignment.tiers[t].size());
      for (auto& s : r.importance.scores) s = rng.uniform(-0.2, 1.0);
      results.push_back(std::move(r));
    }
    const auto [global, accuracy] = aggregate_tiers(results, assignment);
    double total = 0.0;
    for (const double s : global.scores) {
      ASSERT_GE(s, 0.0);
      total += s;
    }
    ASSERT_NEAR(total, 1.0, 1e-9);
    ASSERT_GE(accuracy, 0.0);
    ASSERT_LE(accuracy, 1.0);
  }
}

TEST(Acceptance, C08_DiversityContract) {
  EXPECT_EQ(max_rank_diff(146), 10658);

  // exhaustive bound check over all 576 permutation pairs at n = 4
  std::vector<std::vector<int>> perms;
  std::vector<int> p{1, 2, 3, 4};
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  ASSERT_EQ(perms.size() * perms.size(), 576u);
  const long long max_diff = max_rank_diff(4);
  for (const auto& a : perms)
    for (const auto& b : perms) {
      const double v = pct_rank_diff(RankVector{a, RankSource::Quantum},
                                     RankVector{b, RankSource::Classical}, max_diff);
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }

  EXPECT_EQ(format_triple({0.835, 0.638, 0.0648, RankSource::Quantum}),
            "83.5% @ 64% @ 0.0648");
  EXPECT_EQ(format_triple({0.950, 0.65, 0.00262, RankSource::Classical}),
            "95.0% @ 65% @ 0.00262");
}

TEST(Acceptance, C09_EndToEndDeterminismAndParallelEquality) {
  Stopwatch watch;
  const Dataset ds = synth_dataset(200, 20, 8, 9);
  ExperimentConfig cfg;
  cfg.model = ModelKind::Qsvc;
  cfg.explainer = ExplainerKind::Pi;
  cfg.tier_size = 10;
  cfg.reps = 3;
  cfg.n_repeats_pi = 5;
  cfg.seed = 9;

  const auto emit_to = [&](const fs::path& dir) {
    fs::remove_all(dir);
    emit_report(run_experiment(cfg, ds), dir);
  };
  const auto report_bytes_without_wallclock = [](const fs::path& dir) {
    std::ifstream in(dir / "report.json", std::ios::binary);
    nlohmann::json j;
    in >> j;
    j.erase("timing");
    j["config"].erase("parallel");
    return j.dump();
  };

  const fs::path base = fs::temp_directory_path() / "qfi_acceptance";
  emit_to(base / "serial_a");
  emit_to(base / "serial_b");
  cfg.parallel = true;
  emit_to(base / "parallel");

  const std::string a = report_bytes_without_wallclock(base / "serial_a");
  const std::string b = report_bytes_without_wallclock(base / "serial_b");
  const std::string c = report_bytes_without_wallclock(base / "parallel");
  EXPECT_EQ(a, b);  // identical config + dataset -> byte-identical report
  EXPECT_EQ(a, c);  // parallel and serial agree
  fs::remove_all(base);
  EXPECT_LT(watch.seconds(), 600.0);
}

TEST(Acceptance, C10_ModelExplainerCombinationsDiversify) {
  const Dataset ds = synth_dataset(120, 12, 6, 21);
  std::vector<std::set<int>> top10_sets;
  for (const ModelKind model : {ModelKind::Qsvc, ModelKind::Vqc}) {
    for (const ExplainerKind explainer : {ExplainerKind::Pi, ExplainerKind::Ale}) {
      ExperimentConfig cfg;
      cfg.model = model;
      cfg.explainer = explainer;
      cfg.tier_size = 6;
      cfg.reps = 2;
      cfg.n_repeats_pi = 3;
      cfg.ale_intervals = 6;
      cfg.spsa_iterations = 80;
      cfg.seed = 21;
      const RunReport report = run_experiment(cfg, ds);
      ASSERT_TRUE(report.baseline.has_value());
      ASSERT_TRUE(report.diversity.primary.vs_counterpart.has_value());
      // quantum and classical global rankings must genuinely differ
      EXPECT_GT(*report.diversity.primary.vs_counterpart, 0.0)
          << report.primary.model_id;
      std::set<int> top10;
      for (std::size_t f = 0; f < report.primary.ranks.rank_of.size(); ++f)
        if (report.primary.ranks.rank_of[f] <= 10) top10.insert(static_cast<int>(f));
      top10_sets.push_back(std::move(top10));
    }
  }
  const std::set<std::set<int>> distinct(top10_sets.begin(), top10_sets.end());
  EXPECT_GE(distinct.size(), 2u);
}

class CriterionLinePrinter : public ::testing::EmptyTestEventListener {
  void OnTestEnd(const ::testing::TestInfo& info) override {
    if (std::string(info.test_suite_name()) != "Acceptance") return;
    const bool passed = info.result() != nullptr && info.result()->Passed();
    std::printf("[acceptance] %s: %s\n", info.name(), passed ? "PASS" : "FAIL");
    std::fflush(stdout);
  }
};

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new CriterionLinePrinter);
  return RUN_ALL_TESTS();
}
