#include "qfi/qkernel.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "oracles.hpp"
#include "qfi/prng.hpp"

using namespace qfi;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix random_features(std::size_t n, std::size_t d, Rng& rng) {
  Matrix X(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) X(r, c) = rng.uniform(0.0, kPi);
  return X;
}

double min_eigenvalue(const KernelMatrix& K) {
  Eigen::MatrixXd m(K.rows, K.cols);
  for (std::size_t i = 0; i < K.rows; ++i)
    for (std::size_t j = 0; j < K.cols; ++j) m(static_cast<long>(i), static_cast<long>(j)) = K.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  return solver.eigenvalues().minCoeff();
}

void expect_valid_train_kernel(const KernelMatrix& K) {
  ASSERT_EQ(K.rows, K.cols);
  ASSERT_TRUE(K.symmetric);
  for (std::size_t i = 0; i < K.rows; ++i) {
    EXPECT_DOUBLE_EQ(K.at(i, i), 1.0);
    for (std::size_t j = 0; j < K.cols; ++j) {
      EXPECT_EQ(K.at(i, j), K.at(j, i));
      EXPECT_GE(K.at(i, j), -1e-10);
      EXPECT_LE(K.at(i, j), 1.0 + 1e-10);
    }
  }
  EXPECT_GE(min_eigenvalue(K), -1e-8);
}

TEST(KernelEntry, SelfFidelityIsOne) {
  const std::vector<double> x{0.7, 2.1, 1.3};
  EXPECT_NEAR(kernel_entry(x, x, FeatureMapSpec{3, 2}), 1.0, 1e-12);
}

TEST(KernelEntry, IdenticalPiInputs) {
  const std::vector<double> x{kPi, kPi};
  EXPECT_NEAR(kernel_entry(x, x, FeatureMapSpec{2, 1}), 1.0, 1e-12);
}

TEST(KernelEntry, MatchesDenseStatevectorOracle) {
  const std::vector<double> x{0.5, 1.0};
  const std::vector<double> y{1.5, 0.2};
  const FeatureMapSpec spec{2, 2};
  const StateVector psi_x =
      test::run_circuit_oracle(zero_state(2), build_zz_feature_map(x, spec));
  const StateVector psi_y =
      test::run_circuit_oracle(zero_state(2), build_zz_feature_map(y, spec));
  const double expected = std::norm(test::inner_product_oracle(psi_y, psi_x));
  EXPECT_NEAR(kernel_entry(x, y, spec), expected, 1e-12);
}

TEST(KernelEntry, DimensionMismatch) {
  const std::vector<double> x{0.5, 1.0};
  const std::vector<double> y{1.5};
  EXPECT_THROW(kernel_entry(x, y, FeatureMapSpec{2, 1}), ValidationError);
}

TEST(TrainKernel, SinglePoint) {
  Matrix X(1, 2);
  X(0, 0) = 0.4;
  X(0, 1) = 2.2;
  const KernelMatrix K = train_kernel_matrix(X, FeatureMapSpec{2, 1});
  ASSERT_EQ(K.rows, 1u);
  EXPECT_DOUBLE_EQ(K.at(0, 0), 1.0);
}

TEST(TrainKernel, DuplicateRows) {
  Matrix X(2, 2);
  X(0, 0) = X(1, 0) = 0.9;
  X(0, 1) = X(1, 1) = 1.7;
  const KernelMatrix K = train_kernel_matrix(X, FeatureMapSpec{2, 3});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(K.at(i, j), 1.0, 1e-12);
}

TEST(TrainKernel, EntrywiseOracleAgreementAndPsd) {
  Rng rng(41);
  const Matrix X = random_features(4, 2, rng);
  const FeatureMapSpec spec{2, 3};
  const KernelMatrix K = train_kernel_matrix(X, spec);
  expect_valid_train_kernel(K);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      EXPECT_EQ(K.at(i, j), kernel_entry(X.row(i), X.row(j), spec));
    }
}

TEST(TrainKernel, EmptyInput) {
  EXPECT_THROW(train_kernel_matrix(Matrix(), FeatureMapSpec{2, 1}), ValidationError);
}

TEST(TrainKernel, RandomBatchesKeepInvariants) {
  Rng rng(97);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 2 + rng.below(15);
    const std::size_t d = 2 + rng.below(3);
    const Matrix X = random_features(n, d, rng);
    expect_valid_train_kernel(train_kernel_matrix(X, FeatureMapSpec{static_cast<int>(d), 3}));
  }
}

TEST(TrainKernel, ParallelMatchesSerialBitwise) {
  Rng rng(53);
  const Matrix X = random_features(12, 3, rng);
  const FeatureMapSpec spec{3, 2};
  const KernelMatrix serial = train_kernel_matrix(X, spec, 1);
  const KernelMatrix parallel = train_kernel_matrix(X, spec, 4);
  EXPECT_EQ(serial, parallel);
}

TEST(CrossKernel, SelfCrossEqualsTrainKernel) {
  Rng rng(61);
  const Matrix X = random_features(5, 2, rng);
  const FeatureMapSpec spec{2, 2};
  const KernelMatrix train = train_kernel_matrix(X, spec);
  const KernelMatrix cross = cross_kernel_matrix(X, X, spec);
  ASSERT_EQ(cross.rows, train.rows);
  ASSERT_FALSE(cross.symmetric);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(cross.at(i, j), train.at(i, j), 1e-12);
}

TEST(CrossKernel, SingleIdenticalPair) {
  Matrix a(1, 2), b(1, 2);
  a(0, 0) = b(0, 0) = 0.3;
  a(0, 1) = b(0, 1) = 2.9;
  const KernelMatrix K = cross_kernel_matrix(a, b, FeatureMapSpec{2, 1});
  ASSERT_EQ(K.rows, 1u);
  ASSERT_EQ(K.cols, 1u);
  EXPECT_NEAR(K.at(0, 0), 1.0, 1e-12);
}

TEST(CrossKernel, EntrywiseOracleAgreement) {
  Rng rng(71);
  const Matrix X_test = random_features(2, 2, rng);
  const Matrix X_train = random_features(3, 2, rng);
  const FeatureMapSpec spec{2, 2};
  const KernelMatrix K = cross_kernel_matrix(X_test, X_train, spec);
  ASSERT_EQ(K.rows, 2u);
  ASSERT_EQ(K.cols, 3u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_EQ(K.at(i, j), kernel_entry(X_test.row(i), X_train.row(j), spec));
}

TEST(CrossKernel, DimensionMismatch) {
  Rng rng(73);
  EXPECT_THROW(
      cross_kernel_matrix(random_features(2, 3, rng), random_features(2, 2, rng),
                          FeatureMapSpec{2, 1}),
      ValidationError);
}

TEST(KernelFile, RoundTrip) {
  Rng rng(83);
  const Matrix X = random_features(4, 2, rng);
  const KernelMatrix K = train_kernel_matrix(X, FeatureMapSpec{2, 2});
  const auto path = std::filesystem::temp_directory_path() / "qfi_kernel_roundtrip.qkm";
  save_kernel(K, path);
  const KernelMatrix loaded = load_kernel(path);
  EXPECT_EQ(K, loaded);
  std::filesystem::remove(path);
}

TEST(KernelFile, RejectsBadMagic) {
  const auto path = std::filesystem::temp_directory_path() / "qfi_kernel_bad.qkm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE and some trailing bytes";
  }
  EXPECT_THROW(load_kernel(path), IngestionError);
  std::filesystem::remove(path);
}

}  // namespace
