#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfi/errors.hpp"
#include "qfi/matrix.hpp"
#include "qfi/parallel.hpp"
#include "qfi/prng.hpp"
#include "qfi/qsim.hpp"

namespace qfi {

enum class OptimizerKind { Spsa };

struct VqcSpec {
  FeatureMapSpec feature_map;
  int ansatz_reps = 1;
  OptimizerKind optimizer = OptimizerKind::Spsa;
  int max_iterations = 100;
  std::uint64_t seed = 0;

  int n_qubits() const { return feature_map.feature_dimension; }
  std::size_t parameter_count() const {
    return static_cast<std::size_t>(n_qubits()) * (ansatz_reps + 1);
  }

  friend bool operator==(const VqcSpec&, const VqcSpec&) = default;
};

struct VqcModel {
  VqcSpec spec;
  std::vector<double> theta;
  std::vector<double> loss_history;
};

// p(class 1) = (1 - <Z_parity>) / 2 of the state prepared by the feature map
// followed by the RotY ansatz. Clamped so the probability is always in [0,1].
inline double vqc_forward(std::span<const double> x, std::span<const double> theta,
                          const VqcSpec& spec) {
  StateVector state = feature_map_state(x, spec.feature_map);
  state = run_circuit(std::move(state), build_ry_ansatz(spec.n_qubits(), spec.ansatz_reps, theta));
  const double parity = parity_expectation(state);
  return std::clamp(0.5 * (1.0 - parity), 0.0, 1.0);
}

// Mean binary cross-entropy with probabilities clamped to [1e-10, 1 - 1e-10].
inline double vqc_loss(std::span<const double> theta, const Matrix& X, std::span<const int> y,
                       const VqcSpec& spec, unsigned n_threads = 1) {
  if (X.rows() == 0) throw ValidationError("loss requires a nonempty data matrix");
  if (y.size() != X.rows()) throw ValidationError("label count does not match data rows");
  std::vector<double> probs(X.rows());
  parallel_for(
      X.rows(), [&](std::size_t r) { probs[r] = vqc_forward(X.row(r), theta, spec); },
      n_threads);
  double loss = 0.0;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const double p = std::clamp(probs[r], 1e-10, 1.0 - 1e-10);
    loss += y[r] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return loss / static_cast<double>(X.rows());
}

struct SpsaOptions {
  int max_iterations = 100;
  std::uint64_t seed = 0;
  double a = 0.1;
  double c = 0.1;
  // gain sequences: a_k = a/(k+1+A)^0.602, c_k = c/(k+1)^0.101, A = max_iterations/10
};

struct SpsaResult {
  std::vector<double> theta;         // best-seen iterate
  std::vector<double> loss_history;  // loss at theta0 and after every update
};

// Simultaneous-perturbation stochastic approximation with Rademacher
// perturbations. Perturbation draws are pre-generated per iteration, so the
// trajectory is fixed by the seed regardless of how loss evaluations are
// scheduled internally. Returns the best-seen iterate, not the last one.
inline SpsaResult spsa_minimize(const std::function<double(std::span<const double>)>& loss_fn,
                                std::vector<double> theta0, const SpsaOptions& options) {
  if (options.max_iterations < 0) throw ValidationError("max_iterations must be >= 0");
  Rng rng(options.seed);
  const double big_a = options.max_iterations / 10.0;
  const std::size_t dim = theta0.size();

  std::vector<double> theta = theta0;
  double loss0 = loss_fn(theta);
  if (!std::isfinite(loss0)) throw OptimizerAbort("non-finite loss at the initial point");
  SpsaResult result;
  result.loss_history.push_back(loss0);
  std::vector<double> best_theta = theta0;
  double best_loss = loss0;

  std::vector<double> delta(dim), trial(dim);
  for (int k = 0; k < options.max_iterations; ++k) {
    const double ak = options.a / std::pow(k + 1 + big_a, 0.602);
    const double ck = options.c / std::pow(k + 1, 0.101);
    for (std::size_t i = 0; i < dim; ++i) delta[i] = static_cast<double>(rng.rademacher());

    for (std::size_t i = 0; i < dim; ++i) trial[i] = theta[i] + ck * delta[i];
    const double loss_plus = loss_fn(trial);
    for (std::size_t i = 0; i < dim; ++i) trial[i] = theta[i] - ck * delta[i];
    const double loss_minus = loss_fn(trial);
    if (!std::isfinite(loss_plus) || !std::isfinite(loss_minus))
      throw OptimizerAbort("non-finite loss in SPSA perturbation at iteration " +
                           std::to_string(k));

    const double scale = (loss_plus - loss_minus) / (2.0 * ck);
    // 1/delta_i == delta_i for Rademacher draws
    for (std::size_t i = 0; i < dim; ++i) theta[i] -= ak * scale * delta[i];

    const double loss_k = loss_fn(theta);
    if (!std::isfinite(loss_k))
      throw OptimizerAbort("non-finite loss after SPSA update at iteration " + std::to_string(k));
    result.loss_history.push_back(loss_k);
    if (loss_k < best_loss) {
      best_loss = loss_k;
      best_theta = theta;
    }
  }
  result.theta = std::move(best_theta);
  return result;
}

namespace detail {

inline constexpr std::uint64_t kVqcInitStream = 0x7641;
inline constexpr std::uint64_t kVqcSpsaStream = 0x5053;

}  // namespace detail

inline VqcModel vqc_fit(const Matrix& X, std::span<const int> y, const VqcSpec& spec,
                        unsigned n_threads = 1) {
  if (X.rows() == 0) throw ValidationError("fit requires a nonempty data matrix");
  if (static_cast<int>(X.cols()) != spec.feature_map.feature_dimension)
    throw ValidationError("data columns do not match the feature map dimension");
  if (y.size() != X.rows()) throw ValidationError("label count does not match data rows");
  if (spec.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (spec.ansatz_reps < 0) throw ValidationError("ansatz_reps must be >= 0");
  bool has_pos = false, has_neg = false;
  for (const int label : y) {
    if (label != 0 && label != 1) throw ValidationError("labels must be 0/1");
    (label == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw DegenerateLabelsError("training labels contain a single class");

  Rng init_rng(derive_seed(spec.seed, detail::kVqcInitStream));
  std::vector<double> theta0(spec.parameter_count());
  for (double& t : theta0) t = init_rng.uniform(-std::numbers::pi, std::numbers::pi);

  const auto loss_fn = [&](std::span<const double> theta) {
    return vqc_loss(theta, X, y, spec, n_threads);
  };
  SpsaOptions options;
  options.max_iterations = spec.max_iterations;
  options.seed = derive_seed(spec.seed, detail::kVqcSpsaStream);
  SpsaResult res = spsa_minimize(loss_fn, std::move(theta0), options);

  return VqcModel{spec, std::move(res.theta), std::move(res.loss_history)};
}

inline std::vector<double> vqc_predict_proba(const VqcModel& model, const Matrix& X,
                                             unsigned n_threads = 1) {
  std::vector<double> probs(X.rows());
  parallel_for(
      X.rows(), [&](std::size_t r) { probs[r] = vqc_forward(X.row(r), model.theta, model.spec); },
      n_threads);
  return probs;
}

// p >= 0.5 maps to class 1.
inline std::vector<int> labels_from_probabilities(std::span<const double> probs) {
  std::vector<int> labels(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) labels[i] = probs[i] >= 0.5 ? 1 : 0;
  return labels;
}

inline std::vector<int> vqc_predict(const VqcModel& model, const Matrix& X,
                                    unsigned n_threads = 1) {
  return labels_from_probabilities(vqc_predict_proba(model, X, n_threads));
}

inline nlohmann::json vqc_to_json(const VqcModel& model) {
  return nlohmann::json{
      {"spec",
       {{"feature_dimension", model.spec.feature_map.feature_dimension},
        {"reps", model.spec.feature_map.reps},
        {"ansatz_reps", model.spec.ansatz_reps},
        {"optimizer", "spsa"},
        {"max_iterations", model.spec.max_iterations},
        {"seed", model.spec.seed}}},
      {"theta", model.theta},
      {"final_loss", model.loss_history.empty() ? 0.0 : model.loss_history.back()}};
}

}  // namespace qfi
