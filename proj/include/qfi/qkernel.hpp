#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfi/errors.hpp"
#include "qfi/matrix.hpp"
#include "qfi/parallel.hpp"
#include "qfi/qsim.hpp"

namespace qfi {

// Real matrix of pairwise state fidelities, row-major. Train kernels are
// square and carry symmetric = true with the diagonal pinned to exactly 1.
struct KernelMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  bool symmetric = false;

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  friend bool operator==(const KernelMatrix&, const KernelMatrix&) = default;
};

// Fidelity |<psi(y)|psi(x)>|^2 between feature-mapped statevectors.
inline double kernel_entry(std::span<const double> x, std::span<const double> y,
                           const FeatureMapSpec& spec) {
  const StateVector psi_x = feature_map_state(x, spec);
  const StateVector psi_y = feature_map_state(y, spec);
  return std::norm(inner_product(psi_y, psi_x));
}

namespace detail {

inline std::vector<StateVector> map_all_rows(const Matrix& X, const FeatureMapSpec& spec,
                                             unsigned n_threads) {
  std::vector<StateVector> states(X.rows());
  parallel_for(
      X.rows(), [&](std::size_t r) { states[r] = feature_map_state(X.row(r), spec); },
      n_threads);
  return states;
}

}  // namespace detail

// Symmetric train kernel. One simulation per data point; only the upper
// triangle is computed, then mirrored. Entry evaluation may run on several
// threads; every entry lands in a fixed slot so the assembled matrix is
// bit-identical for any thread count.
inline KernelMatrix train_kernel_matrix(const Matrix& X, const FeatureMapSpec& spec,
                                        unsigned n_threads = 1) {
  if (X.rows() == 0) throw ValidationError("train kernel requires a nonempty data matrix");
  if (static_cast<int>(X.cols()) != spec.feature_dimension)
    throw ValidationError("data has " + std::to_string(X.cols()) +
                          " columns, feature map expects " +
                          std::to_string(spec.feature_dimension));
  const std::size_t n = X.rows();
  const std::vector<StateVector> states = detail::map_all_rows(X, spec, n_threads);

  KernelMatrix K{n, n, std::vector<double>(n * n, 0.0), true};
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));

  parallel_for(
      pairs.size(),
      [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        const double v = std::norm(inner_product(states[j], states[i]));
        K.at(i, j) = v;
        K.at(j, i) = v;
      },
      n_threads);
  for (std::size_t i = 0; i < n; ++i) K.at(i, i) = 1.0;
  return K;
}

// Rectangular test-vs-train kernel; entry (i, j) = k(X_test[i], X_train[j]).
inline KernelMatrix cross_kernel_matrix(const Matrix& X_test, const Matrix& X_train,
                                        const FeatureMapSpec& spec, unsigned n_threads = 1) {
  if (X_train.rows() == 0) throw ValidationError("cross kernel requires nonempty train data");
  if (static_cast<int>(X_train.cols()) != spec.feature_dimension ||
      (X_test.rows() > 0 && static_cast<int>(X_test.cols()) != spec.feature_dimension))
    throw ValidationError("cross kernel dimension mismatch with feature map");
  const std::size_t m = X_test.rows();
  const std::size_t n = X_train.rows();
  const std::vector<StateVector> train_states = detail::map_all_rows(X_train, spec, n_threads);
  const std::vector<StateVector> test_states = detail::map_all_rows(X_test, spec, n_threads);

  KernelMatrix K{m, n, std::vector<double>(m * n, 0.0), false};
  parallel_for(
      m * n,
      [&](std::size_t idx) {
        const std::size_t i = idx / n;
        const std::size_t j = idx % n;
        K.at(i, j) = std::norm(inner_product(train_states[j], test_states[i]));
      },
      n_threads);
  return K;
}

// Flat binary format: magic "QKM1", rows and cols as 64-bit little-endian
// integers, then row-major 64-bit floats.
inline void save_kernel(const KernelMatrix& K, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  auto put_u64 = [&](std::uint64_t v) {
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>((v >> (8 * b)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
  };
  out.write("QKM1", 4);
  put_u64(K.rows);
  put_u64(K.cols);
  for (const double v : K.values) put_u64(std::bit_cast<std::uint64_t>(v));
  if (!out) throw IoError("failed writing kernel to " + path.string());
}

inline KernelMatrix load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "QKM1", 4) != 0)
    throw IngestionError(path.string() + ": not a QKM1 kernel file");
  auto get_u64 = [&]() {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return v;
  };
  KernelMatrix K;
  K.rows = get_u64();
  K.cols = get_u64();
  if (!in) throw IngestionError(path.string() + ": truncated kernel header");
  constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 32;
  if (K.rows == 0 || K.cols == 0 ||
      static_cast<std::uint64_t>(K.rows) * K.cols > kMaxEntries)
    throw IngestionError(path.string() + ": implausible kernel dimensions");
  K.values.resize(K.rows * K.cols);
  for (double& v : K.values) v = std::bit_cast<double>(get_u64());
  if (!in) throw IngestionError(path.string() + ": truncated kernel data");
  if (K.rows == K.cols) {
    K.symmetric = true;
    for (std::size_t i = 0; i < K.rows && K.symmetric; ++i)
      for (std::size_t j = i + 1; j < K.cols; ++j)
        if (K.at(i, j) != K.at(j, i)) {
          K.symmetric = false;
          break;
        }
  }
  return K;
}

}  // namespace qfi
