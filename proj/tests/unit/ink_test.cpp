#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sparsespec/ink.hpp"
#include "sparsespec/synth.hpp"

using namespace sparsespec;

TEST(MismatchAccuracy, HandExample) {
  // ink 1: T=1, N=1 -> 1/2; ink 2: T=2, F=1 -> 2/3; mean 7/12.
  EXPECT_NEAR(mismatch_accuracy({1, 1, 2, 2}, {1, 2, 2, 2}, 2), 7.0 / 12.0, 1e-15);
}

TEST(MismatchAccuracy, IdentityAndRelabeling) {
  const std::vector<int> y{1, 2, 3, 3, 2, 1, 1};
  EXPECT_EQ(mismatch_accuracy(y, y, 3), 1.0);
  std::vector<int> relabeled;
  for (int v : y) relabeled.push_back(v % 3 + 1);
  EXPECT_EQ(mismatch_accuracy(y, relabeled, 3), 1.0);
}

TEST(MismatchAccuracy, MatchesDirectPermutationOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int g = 1 + static_cast<int>(rng() % 4);
    std::vector<int> t(40), p(40);
    for (int i = 0; i < 40; ++i) {
      t[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<unsigned>(g + 1));
      p[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng() % static_cast<unsigned>(g));
    }
    const double fast = mismatch_accuracy(t, p, g);
    EXPECT_NEAR(fast, oracle::ink_accuracy(t, p, g), 1e-15);
    EXPECT_NEAR(fast, mismatch_accuracy_reference(t, p, g), 1e-15);
  }
}

TEST(MismatchAccuracy, ZeroTruthIgnoredAndEmptyInkScoresOne) {
  EXPECT_EQ(mismatch_accuracy({0, 0, 1, 1}, {2, 2, 1, 1}, 2), 1.0);
  // One ink in truth, g = 2: the absent ink is only perfect if never predicted.
  EXPECT_LE(mismatch_accuracy({1, 1, 1, 1}, {1, 2, 1, 2}, 2), 0.5);
}

TEST(MismatchAccuracy, Errors) {
  EXPECT_THROW(mismatch_accuracy({1}, {1, 1}, 2), DataError);
  EXPECT_THROW(mismatch_accuracy({1}, {1}, 9), std::invalid_argument);
  EXPECT_THROW(mismatch_accuracy({3}, {1}, 2), DataError);
  EXPECT_THROW(mismatch_accuracy({1}, {0}, 2), DataError);
}

TEST(ExtractInkSpectra, CountsNormalizesAndLabels) {
  HyperspectralCube cube = HyperspectralCube::zeros(4, 3, 3);
  Mask mask = Mask::Zero(3, 4);
  Eigen::MatrixXi labels = Eigen::MatrixXi::Zero(3, 4);
  const int xs[] = {0, 1, 3, 2, 0}, ys[] = {0, 0, 1, 2, 2};
  for (int i = 0; i < 5; ++i) {
    mask(ys[i], xs[i]) = 1;
    labels(ys[i], xs[i]) = 1 + i % 2;
    for (Index b = 0; b < 3; ++b) cube.at(xs[i], ys[i], b) = 1.0 + b + i;
  }
  const LabeledSpectra s = extract_ink_spectra(cube, mask, &labels);
  ASSERT_EQ(s.spectra.rows(), 5);
  EXPECT_EQ(s.spectra.cols(), 3);
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(s.spectra.row(i).norm(), 1.0, 1e-15);
  // Raster order: (0,0) (1,0) (3,1) (0,2) (2,2).
  EXPECT_EQ(s.labels, (std::vector<int>{1, 2, 1, 1, 2}));
  EXPECT_EQ(s.num_inks, 2);
  EXPECT_THROW(extract_ink_spectra(cube, Mask::Zero(3, 4)), DataError);
  EXPECT_THROW(extract_ink_spectra(cube, Mask::Ones(2, 4)), DataError);
}

TEST(ExtractInkSpectra, ClassMeansFollowGenerator) {
  PageOptions o;
  o.seed = 3;
  const InkPage page = synth_ink_page(o);
  const Mask mask = (page.truth.array() > 0).cast<std::uint8_t>();
  const LabeledSpectra s = extract_ink_spectra(page.cube, mask, &page.truth);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(2, s.spectra.cols());
  Eigen::Vector2d count = Eigen::Vector2d::Zero();
  for (Index i = 0; i < s.spectra.rows(); ++i) {
    mean.row(s.labels[static_cast<std::size_t>(i)] - 1) += s.spectra.row(i);
    count(s.labels[static_cast<std::size_t>(i)] - 1) += 1.0;
  }
  // The inks differ at the separable band; other bands move only through row normalization.
  mean.row(0) /= count(0);
  mean.row(1) /= count(1);
  const Eigen::RowVectorXd diff = mean.row(1) - mean.row(0);
  EXPECT_GT(diff(o.separable_band), 0.05);
  for (Index b = 0; b < diff.size(); ++b)
    if (b != o.separable_band) EXPECT_LT(std::abs(diff(b)), 0.25 * diff(o.separable_band)) << b;
}

TEST(SelectBands, SubsetsColumns) {
  LabeledSpectra s;
  s.spectra = Eigen::MatrixXd::Random(4, 5);
  s.labels = {1, 2, 1, 2};
  const LabeledSpectra sub = select_bands(s, {1, 4});
  EXPECT_EQ(sub.spectra.col(0), s.spectra.col(1));
  EXPECT_EQ(sub.spectra.col(1), s.spectra.col(4));
  EXPECT_THROW(select_bands(s, {5}), DataError);
  EXPECT_THROW(select_bands(s, {}), DataError);
}

TEST(Detect, SeparablePageFullBands) {
  PageOptions o;
  o.seed = 1;
  const InkPage page = synth_ink_page(o);
  const DetectReport rep = detect(page.cube, {}, &page.truth);
  ASSERT_TRUE(rep.accuracy);
  EXPECT_EQ(*rep.accuracy, 1.0);
  EXPECT_EQ(rep.mask_band, page.mask_band);
  EXPECT_FALSE(rep.blank);
}

TEST(Detect, NonSeparableBandNearChance) {
  PageOptions o;
  o.seed = 2;
  const InkPage page = synth_ink_page(o);
  DetectOptions d;
  d.bands = {0};
  const DetectReport rep = detect(page.cube, d, &page.truth);
  ASSERT_TRUE(rep.accuracy);
  EXPECT_LT(*rep.accuracy, 0.45);
}

TEST(Detect, SingleInkPageScoresAtMostHalf) {
  PageOptions o;
  o.seed = 4;
  o.num_inks = 1;
  const InkPage page = synth_ink_page(o);
  const DetectReport rep = detect(page.cube, {}, &page.truth);
  ASSERT_TRUE(rep.accuracy);
  EXPECT_LE(*rep.accuracy, 0.5);
}

TEST(Detect, BlankPageHasNoInk) {
  PageOptions o;
  o.strokes = 0;
  o.falloff_to = o.background;
  const InkPage page = synth_ink_page(o);
  const DetectReport rep = detect(page.cube, {});
  EXPECT_TRUE(rep.blank);
  EXPECT_EQ(rep.ink_pixels, 0);
  EXPECT_FALSE(rep.clusters);
}
