#include <gtest/gtest.h>

#include <random>

#include "ganeye/error.hpp"
#include "ganeye/metric.hpp"
#include "support/oracles.hpp"

using namespace ganeye;

namespace {

const EyeCalibration kCal{{0.38, 0.45}, {0.62, 0.45}, 200, "ref"};

}  // namespace

TEST(EyeCenter, AveragesPoints) {
  const std::vector<PixelPoint> pts{{10, 20}, {14, 22}, {12, 27}};
  const auto c = eye_center(pts);
  EXPECT_DOUBLE_EQ(c.x, 12.0);
  EXPECT_DOUBLE_EQ(c.y, 23.0);
}

TEST(EyeCenter, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(eye_center(std::vector<PixelPoint>{}), InvalidInput);
  EXPECT_THROW(eye_center(std::vector<PixelPoint>{{std::nan(""), 1.0}}), InvalidInput);
}

TEST(NormalizePoint, DividesAndClamps) {
  const auto p = normalize_point({128, 64}, 256, 256);
  EXPECT_DOUBLE_EQ(p.x, 0.5);
  EXPECT_DOUBLE_EQ(p.y, 0.25);
  const auto q = normalize_point({-3, 300}, 256, 256);
  EXPECT_EQ(q.x, 0.0);
  EXPECT_EQ(q.y, 1.0);
  EXPECT_THROW(normalize_point({1, 1}, 0, 10), InvalidInput);
}

TEST(GanEyeDistance, ZeroAtCalibration) {
  EXPECT_EQ(gan_eye_distance(1, EyePair{kCal.left, kCal.right}, kCal), 0.0);
}

TEST(GanEyeDistance, MatchesHighPrecisionOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const EyePair eyes{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const EyeCalibration cal{{u(rng), u(rng)}, {u(rng), u(rng)}, 1, ""};
    const double want = static_cast<double>(oracle::eye_distance_hp(eyes.left, eyes.right, cal.left, cal.right));
    EXPECT_NEAR(gan_eye_distance(1, eyes, cal), std::min(1.0, want), 1e-15);
  }
}

TEST(GanEyeDistance, DisplacedEye) {
  const EyePair eyes{{0.38, 0.52}, {0.62, 0.45}};
  EXPECT_NEAR(gan_eye_distance(1, eyes, kCal), 0.0247487, 1e-7);
}

TEST(GanEyeDistance, OppositeCornersReachOne) {
  const EyeCalibration cal{{0, 0}, {1, 1}, 1, ""};
  EXPECT_DOUBLE_EQ(gan_eye_distance(1, EyePair{{1, 1}, {0, 0}}, cal), 1.0);
}

TEST(GanEyeDistance, FaceCountOtherThanOneScoresOne) {
  for (std::size_t n : {0u, 2u, 3u, 17u}) EXPECT_EQ(gan_eye_distance(n, std::nullopt, kCal), 1.0);
}

TEST(GanEyeDistance, ContractViolations) {
  EXPECT_THROW(gan_eye_distance(1, std::nullopt, kCal), ContractViolation);
  EXPECT_THROW(gan_eye_distance(2, EyePair{kCal.left, kCal.right}, kCal), ContractViolation);
  EXPECT_THROW(gan_eye_distance(1, EyePair{{1.2, 0.5}, {0.5, 0.5}}, kCal), InvalidInput);
}

TEST(Calibrate, AveragesSingleFaceObservationsOnly) {
  std::vector<EyeObservation> obs;
  for (int i = 0; i < 10; ++i) {
    const double d = (i - 4.5) * 0.001;
    obs.push_back({1, EyePair{{0.38 + d, 0.45}, {0.62, 0.45 - d}}});
  }
  obs.push_back({0, std::nullopt});
  obs.push_back({3, std::nullopt});
  const auto r = calibrate(obs, 10, "unit");
  EXPECT_EQ(r.skipped, 2u);
  EXPECT_EQ(r.calibration.n_images, 10u);
  EXPECT_NEAR(r.calibration.left.x, 0.38, 1e-15);
  EXPECT_NEAR(r.calibration.right.y, 0.45, 1e-15);
  EXPECT_EQ(r.calibration.source, "unit");
}

TEST(Calibrate, ShortfallIsNamed) {
  std::vector<EyeObservation> obs(7, EyeObservation{1, EyePair{{0.4, 0.4}, {0.6, 0.4}}});
  try {
    calibrate(obs, 10);
    FAIL();
  } catch (const CalibrationError& e) {
    EXPECT_NE(std::string(e.what()).find("short by 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(calibrate(std::vector<EyeObservation>{}, 0), CalibrationError);
  EXPECT_NO_THROW(calibrate(obs, 7));
}

TEST(Filter, StrictThresholdAndOrder) {
  std::vector<ScoreRecord> s{{"c", 1, std::nullopt, 0.01}, {"a", 1, std::nullopt, 0.02}, {"b", 1, std::nullopt, 0.005},
                             {"d", 1, std::nullopt, 0.01}, {"e", 0, std::nullopt, 1.0}};
  const auto out = filter_candidates(s, 0.02);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].image_id, "b");
  EXPECT_EQ(out[1].image_id, "c");
  EXPECT_EQ(out[2].image_id, "d");
  EXPECT_EQ(filter_candidates(s, 1.0).size(), 4u);
}

TEST(Filter, ThresholdRange) {
  EXPECT_THROW(check_threshold(0.0), InvalidInput);
  EXPECT_THROW(check_threshold(1.5), InvalidInput);
  EXPECT_THROW(check_threshold(std::nan("")), InvalidInput);
  EXPECT_NO_THROW(check_threshold(1.0));
}

TEST(Filter, IsMonotoneInThreshold) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  std::vector<ScoreRecord> s;
  for (int i = 0; i < 500; ++i) s.push_back({"id" + std::to_string(i), 1, std::nullopt, u(rng)});
  std::size_t prev = 0;
  for (double t = 0.001; t <= 0.05; t += 0.001) {
    const auto n = filter_candidates(s, t).size();
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(Recall, CountsBelowThreshold) {
  std::vector<ScoreRecord> s{{"a", 1, std::nullopt, 0.001}, {"b", 1, std::nullopt, 0.5}};
  EXPECT_DOUBLE_EQ(recall_at(s, 0.02), 0.5);
  EXPECT_THROW(recall_at(std::vector<ScoreRecord>{}, 0.02), InvalidInput);
}
