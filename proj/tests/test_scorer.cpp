#include <gtest/gtest.h>

#include "lusfeat/json.hpp"
#include "lusfeat/phantom.hpp"
#include "lusfeat/scorer.hpp"

using namespace lusfeat;

namespace {

FeatureSummary summary(double a, std::size_t b, double conf, double cons) {
  FeatureSummary fs;
  fs.a_line_score = a;
  fs.b_line_count = b;
  fs.confluent_frac = conf;
  fs.consolidation_score = cons;
  return fs;
}

Phantom canonical(int k, std::uint64_t seed = 7, double speckle = 0.05) {
  auto s = default_spec(SeverityClass(k), 256, 256, seed);
  s.speckle_sigma = speckle;
  return generate(s);
}

}  // namespace

TEST(Classify, RuleTable) {
  EXPECT_EQ(classify(summary(0.9, 0, 0.0, 0.0)), SeverityClass(1));
  EXPECT_EQ(classify(summary(0.1, 3, 0.2, 0.0)), SeverityClass(3));
  EXPECT_EQ(classify(summary(0.1, 0, 0.0, 0.0)), SeverityClass(2));
  EXPECT_EQ(classify(summary(0.9, 2, 0.5, 0.0)), SeverityClass(4));
  EXPECT_EQ(classify(summary(0.9, 2, 0.5, 0.6)), SeverityClass(5));
}

TEST(Classify, ThresholdsAreStrict) {
  EXPECT_EQ(classify(summary(0.5, 0, 0.0, 0.0)), SeverityClass(2));
  EXPECT_EQ(classify(summary(0.0, 0, 0.4, 0.0)), SeverityClass(2));
  EXPECT_EQ(classify(summary(0.0, 0, 0.0, 0.5)), SeverityClass(2));
}

TEST(Classify, MonotoneInConfluence) {
  for (double a : {0.0, 0.6, 0.9}) {
    for (std::size_t b : {0u, 1u, 4u}) {
      for (double cons : {0.0, 0.3, 0.49}) {
        int prev = 0;
        for (int i = 0; i <= 20; ++i) {
          const int k = classify(summary(a, b, i / 20.0, cons)).value();
          EXPECT_GE(k, prev) << a << " " << b << " " << cons << " " << i;
          prev = std::max(prev, k);
        }
      }
    }
  }
}

TEST(Pleura, UniformLpiTiesToBandStart) {
  const Image lpi(100, 10, 0.5f);
  EXPECT_EQ(detect_pleura(lpi, 0.05, 0.6), 5u);
  EXPECT_EQ(detect_pleura(lpi, lpi, 0.05, 0.6), 5u);
}

TEST(Pleura, InvertedBandIsRejected) {
  EXPECT_THROW(detect_pleura(Image(100, 10), 0.5, 0.05), std::invalid_argument);
  EXPECT_THROW(detect_pleura(Image(100, 10), 0.3, 0.3), std::invalid_argument);
}

TEST(Pleura, FoundOnClassOnePhantoms) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ph = canonical(1, seed);
    const auto maps = compute_features(ph.image);
    const auto row = detect_pleura(maps.lpi, maps.rectified);
    EXPECT_LE(std::abs(long(row) - long(ph.truth.pleura_row)), 2) << "seed " << seed;
  }
}

TEST(ALines, ClassOneScoresHigh) {
  const auto ph = canonical(1, 7, 0.0);
  EXPECT_GT(detect_a_lines(ph.image, ph.truth.pleura_row), 0.7);
}

TEST(ALines, ClassTwoScoresLow) {
  const auto ph = canonical(2, 7, 0.0);
  EXPECT_LT(detect_a_lines(ph.image, ph.truth.pleura_row), 0.3);
}

TEST(ALines, ZeroImageScoresZero) { EXPECT_EQ(detect_a_lines(Image(64, 64), 10), 0.0); }

TEST(ALines, PleuraTooDeep) {
  EXPECT_EQ(detect_a_lines(Image(64, 64, 0.5f), 60), 0.0);
  EXPECT_THROW(detect_a_lines(Image(64, 64), 1), std::invalid_argument);
}

TEST(BLines, DiscreteLinesAreCounted) {
  const auto ph = canonical(3);
  const auto maps = compute_features(ph.image);
  const auto b = detect_b_lines(maps.shibs, ph.truth.pleura_row, 0.3);
  EXPECT_EQ(b.count, 2u);
  EXPECT_LT(b.confluent_frac, 0.4);
}

TEST(BLines, ConfluentLinesCoverMostColumns) {
  const auto ph = canonical(4);
  const auto maps = compute_features(ph.image);
  EXPECT_GE(detect_b_lines(maps.shibs, ph.truth.pleura_row, 0.3).confluent_frac, 0.6);
}

TEST(BLines, DarkLungHasNone) {
  Image img(100, 80);
  for (std::size_t c = 0; c < 80; ++c) img(20, c) = 1.0f;
  EXPECT_EQ(detect_b_lines(img, 20, 0.3).count, 0u);
  EXPECT_EQ(detect_b_lines(Image(100, 80), 20, 0.3).count, 0u);
}

TEST(Consolidation, SeparatesClassFive) {
  const ScorerConfig cfg;
  for (int k = 1; k <= 5; ++k) {
    const auto ph = canonical(k);
    const auto maps = compute_features(ph.image);
    const auto row = detect_pleura(maps.lpi, maps.rectified);
    const double s = consolidation_score(maps.rectified, row, cfg);
    if (k == 5) {
      EXPECT_GT(s, cfg.tau_consolidation);
    } else {
      EXPECT_LT(s, cfg.tau_consolidation) << "class " << k;
    }
  }
}

TEST(Assess, CanonicalPhantomsAreClassified) {
  for (int k = 1; k <= 5; ++k) {
    const auto a = assess(canonical(k).image);
    EXPECT_EQ(a.severity, SeverityClass(k));
    const auto& fs = a.summary;
    EXPECT_GE(fs.a_line_score, 0.0);
    EXPECT_LE(fs.a_line_score, 1.0);
    EXPECT_GE(fs.confluent_frac, 0.0);
    EXPECT_LE(fs.confluent_frac, 1.0);
    EXPECT_GE(fs.consolidation_score, 0.0);
    EXPECT_LE(fs.consolidation_score, 1.0);
    EXPECT_LT(fs.pleura_row, 256u);
  }
}

TEST(Assess, ScaleInvariant) {
  for (int k = 1; k <= 5; ++k) {
    const auto img = canonical(k, 3).image;
    const auto base = assess(img).severity;
    for (float a : {0.2f, 5.0f}) {
      Image scaled = img;
      for (auto& v : scaled.pixels()) v *= a;
      EXPECT_EQ(assess(scaled).severity, base) << "class " << k << " scale " << a;
    }
  }
}

TEST(Config, JsonOverridesAndRejectsUnknownKeys) {
  const auto cfg = json{{"tau_a_line", 0.7}}.get<ScorerConfig>();
  EXPECT_EQ(cfg.tau_a_line, 0.7);
  EXPECT_EQ(cfg.tau_confluent, ScorerConfig{}.tau_confluent);
  EXPECT_THROW(json({{"tau_b_line", 0.7}}).get<ScorerConfig>(), ConfigError);
  EXPECT_THROW(json({{"pleura_band_lo", 0.7}}).get<ScorerConfig>(), std::invalid_argument);
  EXPECT_EQ(json(json(ScorerConfig{}).get<ScorerConfig>()), json(ScorerConfig{}));
}
