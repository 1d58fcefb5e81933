#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qfi/errors.hpp"

namespace qfi {

enum class ModelKind { Qsvc, Vqc, Gbdt };
enum class ExplainerKind { Pi, Ale };

inline std::string model_kind_name(ModelKind m) {
  switch (m) {
    case ModelKind::Qsvc: return "qsvc";
    case ModelKind::Vqc: return "vqc";
    default: return "gbdt";
  }
}

inline ModelKind model_kind_from_name(const std::string& name) {
  if (name == "qsvc") return ModelKind::Qsvc;
  if (name == "vqc") return ModelKind::Vqc;
  if (name == "gbdt") return ModelKind::Gbdt;
  throw ValidationError("unknown model '" + name + "' (expected qsvc, vqc, or gbdt)");
}

inline std::string explainer_kind_name(ExplainerKind e) {
  return e == ExplainerKind::Pi ? "pi" : "ale";
}

inline ExplainerKind explainer_kind_from_name(const std::string& name) {
  if (name == "pi") return ExplainerKind::Pi;
  if (name == "ale") return ExplainerKind::Ale;
  throw ValidationError("unknown explainer '" + name + "' (expected pi or ale)");
}

struct ExperimentConfig {
  ModelKind model = ModelKind::Qsvc;
  ExplainerKind explainer = ExplainerKind::Pi;
  int tier_size = 10;
  int reps = 3;
  int n_repeats_pi = 5;
  int ale_intervals = 10;
  double train_fraction = 0.8;
  double C = 1.0;
  int spsa_iterations = 100;
  std::uint64_t seed = 0;
  bool parallel = false;
  int max_rows = 0;       // 0 = no subsampling cap
  bool untiered = false;  // gbdt only: one tier holding all features

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.tier_size < 1) throw ValidationError("tier_size must be >= 1");
  if (cfg.reps < 1) throw ValidationError("reps must be >= 1");
  if (cfg.n_repeats_pi < 1) throw ValidationError("n_repeats_pi must be >= 1");
  if (cfg.ale_intervals < 1) throw ValidationError("ale_intervals must be >= 1");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw ValidationError("train_fraction must be in (0, 1)");
  if (!(cfg.C > 0.0)) throw ValidationError("C must be positive");
  if (cfg.spsa_iterations < 1) throw ValidationError("spsa_iterations must be >= 1");
  if (cfg.max_rows < 0) throw ValidationError("max_rows must be >= 0");
  if (cfg.untiered && cfg.model != ModelKind::Gbdt)
    throw ValidationError("untiered mode is only available for the gbdt model");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config key '" + key + "': expected true/false, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& v, const std::string& key) {
  std::istringstream in(v);
  T value{};
  in >> value;
  if (in.fail() || !in.eof())
    throw ValidationError("config key '" + key + "': cannot parse '" + v + "'");
  return value;
}

}  // namespace detail

// Flat "key = value" text format. Blank lines and lines starting with '#'
// are ignored; unknown keys are rejected.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key == "model") cfg.model = model_kind_from_name(value);
    else if (key == "explainer") cfg.explainer = explainer_kind_from_name(value);
    else if (key == "tier_size") cfg.tier_size = detail::parse_number<int>(value, key);
    else if (key == "reps") cfg.reps = detail::parse_number<int>(value, key);
    else if (key == "n_repeats_pi") cfg.n_repeats_pi = detail::parse_number<int>(value, key);
    else if (key == "ale_intervals") cfg.ale_intervals = detail::parse_number<int>(value, key);
    else if (key == "train_fraction") cfg.train_fraction = detail::parse_number<double>(value, key);
    else if (key == "C") cfg.C = detail::parse_number<double>(value, key);
    else if (key == "spsa_iterations") cfg.spsa_iterations = detail::parse_number<int>(value, key);
    else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(value, key);
    else if (key == "parallel") cfg.parallel = detail::parse_bool(value, key);
    else if (key == "max_rows") cfg.max_rows = detail::parse_number<int>(value, key);
    else if (key == "untiered") cfg.untiered = detail::parse_bool(value, key);
    else throw ValidationError("config line " + std::to_string(line_no) + ": unknown key '" +
                               key + "'");
  }
  validate_config(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

inline std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  char fraction[64], c_value[64];
  std::snprintf(fraction, sizeof(fraction), "%.17g", cfg.train_fraction);
  std::snprintf(c_value, sizeof(c_value), "%.17g", cfg.C);
  out << "model = " << model_kind_name(cfg.model) << '\n'
      << "explainer = " << explainer_kind_name(cfg.explainer) << '\n'
      << "tier_size = " << cfg.tier_size << '\n'
      << "reps = " << cfg.reps << '\n'
      << "n_repeats_pi = " << cfg.n_repeats_pi << '\n'
      << "ale_intervals = " << cfg.ale_intervals << '\n'
      << "train_fraction = " << fraction << '\n'
      << "C = " << c_value << '\n'
      << "spsa_iterations = " << cfg.spsa_iterations << '\n'
      << "seed = " << cfg.seed << '\n'
      << "parallel = " << (cfg.parallel ? "true" : "false") << '\n'
      << "max_rows = " << cfg.max_rows << '\n'
      << "untiered = " << (cfg.untiered ? "true" : "false") << '\n';
  return out.str();
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  return nlohmann::json{{"model", model_kind_name(cfg.model)},
                        {"explainer", explainer_kind_name(cfg.explainer)},
                        {"tier_size", cfg.tier_size},
                        {"reps", cfg.reps},
                        {"n_repeats_pi", cfg.n_repeats_pi},
                        {"ale_intervals", cfg.ale_intervals},
                        {"train_fraction", cfg.train_fraction},
                        {"C", cfg.C},
                        {"spsa_iterations", cfg.spsa_iterations},
                        {"seed", cfg.seed},
                        {"parallel", cfg.parallel},
                        {"max_rows", cfg.max_rows},
                        {"untiered", cfg.untiered}};
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.model = model_kind_from_name(j.at("model").get<std::string>());
  cfg.explainer = explainer_kind_from_name(j.at("explainer").get<std::string>());
  j.at("tier_size").get_to(cfg.tier_size);
  j.at("reps").get_to(cfg.reps);
  j.at("n_repeats_pi").get_to(cfg.n_repeats_pi);
  j.at("ale_intervals").get_to(cfg.ale_intervals);
  j.at("train_fraction").get_to(cfg.train_fraction);
  j.at("C").get_to(cfg.C);
  j.at("spsa_iterations").get_to(cfg.spsa_iterations);
  j.at("seed").get_to(cfg.seed);
  j.at("parallel").get_to(cfg.parallel);
  j.at("max_rows").get_to(cfg.max_rows);
  j.at("untiered").get_to(cfg.untiered);
  validate_config(cfg);
  return cfg;
}

}  // namespace qfi
