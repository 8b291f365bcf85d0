#include <gtest/gtest.h>

#include <map>

#include "lusfeat/json.hpp"
#include "lusfeat/phantom.hpp"

using namespace lusfeat;

namespace {

PhantomSpec spec_for(int k) { return default_spec(SeverityClass(k), 128, 128, 3); }

void expect_rejected(const PhantomSpec& s, const std::string& fragment) {
  try {
    s.validate();
    ADD_FAILURE() << "spec accepted, expected: " << fragment;
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Phantom, DeterministicForASeed) {
  for (int k = 1; k <= 5; ++k) {
    const auto a = generate(spec_for(k));
    const auto b = generate(spec_for(k));
    EXPECT_EQ(a.image, b.image) << "class " << k;
    auto other = spec_for(k);
    other.seed = 4;
    EXPECT_NE(generate(other).image, a.image) << "class " << k;
  }
}

TEST(Phantom, OutputIsNormalized) {
  for (int k = 1; k <= 5; ++k) {
    const auto ph = generate(spec_for(k));
    EXPECT_EQ(min_value(ph.image), 0.0f);
    EXPECT_EQ(max_value(ph.image), 1.0f);
  }
}

TEST(Phantom, ALinesAreGeometricRepetitions) {
  auto spec = default_spec(SeverityClass(1), 512, 512, 7);
  spec.speckle_sigma = 0.0;
  const auto ph = generate(spec);
  const std::size_t p = spec.pleura_row();
  EXPECT_EQ(ph.truth.pleura_row, p);
  ASSERT_EQ(ph.truth.a_line_rows, (std::vector<std::size_t>{2 * p, 3 * p, 4 * p}));

  const auto prof = row_means(ph.image);
  // exactly three bright rows below the pleura: the local maxima
  std::vector<std::size_t> peaks;
  for (std::size_t r = p + 3; r + 1 < prof.size(); ++r) {
    if (prof[r] > 0.1 && prof[r] >= prof[r - 1] && prof[r] > prof[r + 1]) peaks.push_back(r);
  }
  EXPECT_EQ(peaks, ph.truth.a_line_rows);
  for (std::size_t n = 2; n <= 4; ++n) {
    EXPECT_NEAR(prof[n * p] / prof[(n - 1) * p], spec.a_line_decay, 1e-3) << "repetition " << n;
  }
}

TEST(Phantom, SingleBLineColumn) {
  auto spec = default_spec(SeverityClass(3), 256, 256, 7);
  spec.b_lines = {{100.0, 6.0, 1.0}};
  const auto ph = generate(spec);
  EXPECT_EQ(ph.truth.b_line_columns, (std::vector<std::size_t>{100}));
  const auto c = argmax(column_means(ph.image, ph.truth.pleura_row + 1));
  EXPECT_GE(c, 97u);
  EXPECT_LE(c, 103u);
}

TEST(Phantom, ConfluentLinesCoverRequestedFraction) {
  const auto spec = default_spec(SeverityClass(4), 256, 256, 1);
  const auto ph = generate(spec);
  EXPECT_GE(detail::coverage(ph.b_lines, 256), spec.confluent_frac);
  EXPECT_EQ(ph.truth.b_line_columns.size(), spec.b_lines.size());
}

TEST(Phantom, ClassConsistencyIsEnforced) {
  auto s = spec_for(1);
  s.b_lines = {{10, 4, 1}};
  expect_rejected(s, "B-lines are only valid");
  s = spec_for(2);
  s.a_line_count = 2;
  expect_rejected(s, "A-lines are only valid");
  s = spec_for(3);
  s.b_lines.clear();
  expect_rejected(s, "needs at least one B-line");
  s = spec_for(3);
  s.confluent_frac = 0.5;
  expect_rejected(s, "confluent_frac is only valid");
  s = spec_for(4);
  s.confluent_frac = 0.0;
  expect_rejected(s, "needs confluent_frac");
  s = spec_for(5);
  s.consolidation.reset();
  expect_rejected(s, "needs a consolidation");
  s = spec_for(2);
  s.consolidation = Consolidation{};
  expect_rejected(s, "consolidation is only valid");
  s = spec_for(1);
  s.a_line_count = 0;
  expect_rejected(s, "needs at least one A-line");
  s = spec_for(1);
  s.pleura_depth_frac = 0.3;
  expect_rejected(s, "do not fit");
}

TEST(Phantom, FieldRangesAreEnforced) {
  auto s = spec_for(2);
  s.pleura_depth_frac = 0.6;
  expect_rejected(s, "pleura_depth_frac");
  s = spec_for(3);
  s.b_lines = {{200.0, 4, 1}};
  expect_rejected(s, "outside the image");
  s = spec_for(2);
  s.speckle_sigma = -0.1;
  expect_rejected(s, "speckle_sigma");
  s = spec_for(2);
  s.rows = 8;
  expect_rejected(s, "at least 16x16");
  EXPECT_THROW(generate(s), std::invalid_argument);
}

// Self-check harness: 500 drawn specs per class stay inside the documented
// parameter ranges and produce consistent ground truth.
TEST(Phantom, SampledSpecsStayInRange) {
  std::map<int, std::size_t> b_line_total;
  for (int k = 1; k <= 5; ++k) {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      const auto s = sample_spec(SeverityClass(k), 96, 96, seed, 0.05);
      ASSERT_NO_THROW(s.validate()) << "class " << k << " seed " << seed;
      EXPECT_GE(s.pleura_depth_frac, 0.12);
      EXPECT_LE(s.pleura_depth_frac, k == 1 ? 0.2 : 0.3);
      EXPECT_EQ(s.speckle_sigma, 0.05);
      if (k == 3) {
        EXPECT_GE(s.b_lines.size(), 1u);
        EXPECT_LE(s.b_lines.size(), 3u);
      }
      if (k == 4) {
        EXPECT_GE(s.confluent_frac, 0.6);
        EXPECT_LE(s.confluent_frac, 0.85);
      }
      b_line_total[k] += s.b_lines.size();
      if (seed % 25 == 0) {
        const auto ph = generate(s);
        EXPECT_EQ(ph.truth.pleura_row, s.pleura_row());
        EXPECT_EQ(ph.truth.severity, SeverityClass(k));
        EXPECT_EQ(ph.truth.a_line_rows.size(), s.a_line_count);
        EXPECT_EQ(ph.truth.b_line_columns.size(), s.b_lines.size());
        for (auto c : ph.truth.b_line_columns) EXPECT_LT(c, 96u);
      }
    }
  }
  EXPECT_EQ(b_line_total[1], 0u);
  EXPECT_EQ(b_line_total[2], 0u);
  EXPECT_EQ(b_line_total[5], 0u);
}

TEST(Phantom, SpecSurvivesJson) {
  for (int k = 1; k <= 5; ++k) {
    const auto s = sample_spec(SeverityClass(k), 128, 96, 11, 0.03);
    const auto back = json(s).get<PhantomSpec>();
    EXPECT_EQ(json(back), json(s));
    EXPECT_EQ(generate(back).image, generate(s).image);
  }
  EXPECT_THROW(json({{"severity", 2}, {"colour", 1}}).get<PhantomSpec>(), ConfigError);
}
