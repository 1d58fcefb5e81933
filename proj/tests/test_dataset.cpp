#include "qfi/dataset.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "qfi/gbdt.hpp"
#include "qfi/prng.hpp"
#include "qfi/tiers.hpp"

using namespace qfi;
namespace fs = std::filesystem;

namespace {

class TempFile {
 public:
  explicit TempFile(const std::string& name) : path_(fs::temp_directory_path() / name) {}
  ~TempFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  void write(const std::string& content) const {
    std::ofstream out(path_, std::ios::binary);
    out << content;
  }
  std::string read() const {
    std::ifstream in(path_, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(LoadDataset, WellFormedSmallFile) {
  TempFile file("qfi_ds_ok.csv");
  file.write("a,b,label\n1.0,2.0,0\n3.5,-1.25,1\n0.125,4,1\n");
  const Dataset ds = load_dataset(file.path());
  EXPECT_EQ(ds.n_rows(), 3u);
  EXPECT_EQ(ds.n_features(), 2u);
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ds.y, (std::vector<int>{0, 1, 1}));
  EXPECT_DOUBLE_EQ(ds.X(1, 1), -1.25);
}

TEST(LoadDataset, LabelColumnAnywhere) {
  TempFile file("qfi_ds_mid.csv");
  file.write("a,label,b\n1,0,2\n3,1,4\n");
  const Dataset ds = load_dataset(file.path());
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(ds.X(1, 1), 4.0);
}

TEST(LoadDataset, BadLabelValueNamesRow) {
  TempFile file("qfi_ds_badlabel.csv");
  file.write("a,label\n1.0,0\n2.0,2\n");
  try {
    load_dataset(file.path());
    FAIL() << "expected IngestionError";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(LoadDataset, MissingLabelColumn) {
  TempFile file("qfi_ds_nolabel.csv");
  file.write("a,b\n1,2\n");
  EXPECT_THROW(load_dataset(file.path()), IngestionError);
}

TEST(LoadDataset, DuplicateHeaderRejected) {
  TempFile file("qfi_ds_dup.csv");
  file.write("a,a,label\n1,2,0\n");
  EXPECT_THROW(load_dataset(file.path()), IngestionError);
}

TEST(LoadDataset, NonFiniteValueNamesRow) {
  TempFile file("qfi_ds_nan.csv");
  file.write("a,label\n1.0,0\nnan,1\n");
  try {
    load_dataset(file.path());
    FAIL() << "expected IngestionError";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(LoadDataset, FieldCountMismatchNamesRow) {
  TempFile file("qfi_ds_short.csv");
  file.write("a,b,label\n1,2,0\n1,0\n");
  EXPECT_THROW(load_dataset(file.path()), IngestionError);
}

TEST(DatasetRoundTrip, SaveThenLoadIsIdentity) {
  const Dataset ds = synth_dataset(50, 7, 3, 11);
  TempFile file("qfi_ds_roundtrip.csv");
  save_dataset(ds, file.path());
  const Dataset loaded = load_dataset(file.path());
  EXPECT_EQ(ds, loaded);
}

TEST(SmeRanksFile, SmallFileAndErrors) {
  TempFile file("qfi_sme.csv");
  file.write("feature_name,rank\nalpha,2\nbeta,1\n");
  const auto ranks = load_sme_ranks(file.path());
  EXPECT_EQ(ranks.size(), 2u);
  EXPECT_EQ(ranks.at("alpha"), 2);

  file.write("feature_name,rank\nalpha,2\nalpha,1\n");
  EXPECT_THROW(load_sme_ranks(file.path()), IngestionError);
  file.write("feature_name,rank\nalpha,2\nbeta,2\n");
  EXPECT_THROW(load_sme_ranks(file.path()), IngestionError);
  file.write("feature_name,rank\nalpha,0\n");
  EXPECT_THROW(load_sme_ranks(file.path()), IngestionError);
  file.write("nope\nalpha,1\n");
  EXPECT_THROW(load_sme_ranks(file.path()), IngestionError);
}

TEST(SynthDataset, DeterministicPerSeed) {
  const Dataset a = synth_dataset(100, 12, 4, 7);
  const Dataset b = synth_dataset(100, 12, 4, 7);
  EXPECT_EQ(a, b);
  const Dataset c = synth_dataset(100, 12, 4, 8);
  EXPECT_NE(a, c);

  TempFile f1("qfi_synth_a.csv"), f2("qfi_synth_b.csv");
  save_dataset(a, f1.path());
  save_dataset(b, f2.path());
  EXPECT_EQ(f1.read(), f2.read());
}

TEST(SynthDataset, BalancedClasses) {
  const Dataset ds = synth_dataset(4000, 10, 5, 3);
  int positives = 0;
  for (const int label : ds.y) positives += label;
  EXPECT_EQ(positives, 2000);
  const Dataset odd = synth_dataset(101, 3, 1, 3);
  int odd_positives = 0;
  for (const int label : odd.y) odd_positives += label;
  EXPECT_EQ(odd_positives, 50);
}

TEST(SynthDataset, FullWidth146Features) {
  const Dataset ds = synth_dataset(200, 146, 30, 1);
  EXPECT_EQ(ds.n_features(), 146u);
  const std::vector<int> ordering = rank_by_label_correlation(ds.X, ds.y);
  const TierAssignment a = assign_tiers(ordering, 146, 10);
  EXPECT_EQ(a.tiers.size(), 15u);
}

TEST(SynthDataset, UninformativeDataStaysAtChance) {
  double mean_accuracy = 0.0;
  const int seeds = 10;
  for (int seed = 0; seed < seeds; ++seed) {
    const Dataset train = synth_dataset(300, 5, 0, static_cast<std::uint64_t>(seed));
    const Dataset test = synth_dataset(1000, 5, 0, static_cast<std::uint64_t>(seed) + 5000);
    const GbdtModel model = gbdt_fit(train.X, train.y);
    const std::vector<int> pred = gbdt_predict(model, test.X);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == test.y[i] ? 1 : 0;
    mean_accuracy += static_cast<double>(hits) / static_cast<double>(pred.size());
  }
  mean_accuracy /= seeds;
  EXPECT_NEAR(mean_accuracy, 0.5, 0.1);
}

TEST(SynthDataset, FirstFeatureUsuallyMostCorrelated) {
  int wins = 0;
  const int seeds = 100;
  for (int seed = 0; seed < seeds; ++seed) {
    const Dataset ds = synth_dataset(800, 5, 5, static_cast<std::uint64_t>(seed));
    const std::vector<int> ordering = rank_by_label_correlation(ds.X, ds.y);
    wins += ordering[0] == 0 ? 1 : 0;
  }
  EXPECT_GE(wins, 90);
}

TEST(SynthDataset, ArgumentValidation) {
  EXPECT_THROW(synth_dataset(1, 3, 1, 0), ValidationError);
  EXPECT_THROW(synth_dataset(10, 3, 4, 0), ValidationError);
}

}  // namespace
