#include <gtest/gtest.h>

#include <numbers>

#include "lusfeat/localphase.hpp"
#include "oracles.hpp"

using namespace lusfeat;

namespace {

MonogenicComponents uniform_components(float m1, float m2, float m3) {
  return {Image(2, 2, m1), Image(2, 2, m2), Image(2, 2, m3)};
}

Image line_image(std::size_t rows, std::size_t cols, double line_row) {
  Image img(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double d = double(r) - line_row;
    for (std::size_t c = 0; c < cols; ++c) img(r, c) = static_cast<float>(0.05 + std::exp(-d * d / 4.0));
  }
  return img;
}

}  // namespace

TEST(Enhance, FourthPowerRenormalized) {
  const auto out = enhance(Image(2, 2, std::vector<float>{0.5f, 0.9f, 0.0f, 0.0f}));
  EXPECT_NEAR(out(0, 0), 0.0625 / 0.6561, 1e-6);
  EXPECT_NEAR(out(0, 0), 0.09526, 1e-5);
  EXPECT_FLOAT_EQ(out(0, 1), 1.0f);
}

TEST(Enhance, FixedPointAndQuarterPower) {
  const auto out = enhance(Image(2, 2, std::vector<float>{1.0f, 0.5f, 0.0f, 0.0f}));
  EXPECT_FLOAT_EQ(out(0, 0), 1.0f);
  EXPECT_FLOAT_EQ(out(0, 1), 0.0625f);
}

TEST(LogGabor, PeakDcAndOctave) {
  const LogGaborParams p;
  EXPECT_DOUBLE_EQ(LogGaborSpectrum::at(1.0 / 32.0, p), 1.0);
  EXPECT_EQ(LogGaborSpectrum::at(0.0, p), 0.0);
  // exp(-(ln 2)^2 / (2 (ln 0.55)^2)) = exp(-0.480453 / 0.714716)
  EXPECT_NEAR(LogGaborSpectrum::at(2.0 / 32.0, p), 0.51062, 5e-5);
}

TEST(LogGabor, GridMatchesClosedForm) {
  const LogGaborParams p{16.0, 0.55};
  const auto g = log_gabor_spectrum(64, 48, p);
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(g(4, 0), 1.0);   // 4/64 = 1/16 cycles per pixel
  EXPECT_DOUBLE_EQ(g(60, 0), 1.0);  // negative frequency bin
  EXPECT_DOUBLE_EQ(g(0, 3), 1.0);   // 3/48 = 1/16
  EXPECT_NEAR(g(3, 4), LogGaborSpectrum::at(std::hypot(3.0 / 64, 4.0 / 48), p), 1e-15);
}

TEST(LogGabor, ParameterValidation) {
  EXPECT_THROW((LogGaborParams{2.0, 0.55}.validate()), std::invalid_argument);
  EXPECT_THROW((LogGaborParams{32.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((LogGaborParams{32.0, 0.0}.validate()), std::invalid_argument);
}

TEST(Monogenic, ZeroImageGivesZeros) {
  const auto m = monogenic(Image(16, 16), {});
  for (const Image* c : {&m.m1, &m.m2, &m.m3}) {
    for (float v : c->pixels()) EXPECT_EQ(v, 0.0f);
  }
}

TEST(Monogenic, HorizontalGratingHasNoLateralOddPart) {
  Image img(128, 96);
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) {
      img(r, c) = static_cast<float>(std::cos(2.0 * std::numbers::pi * double(r) / 32.0));
    }
  }
  const auto m = monogenic(img, {});
  double m1 = 0, m2 = 0, m3 = 0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    m1 = std::max(m1, double(std::abs(m.m1.pixels()[i])));
    m2 = std::max(m2, double(std::abs(m.m2.pixels()[i])));
    m3 = std::max(m3, double(std::abs(m.m3.pixels()[i])));
  }
  EXPECT_GT(m1, 0.5);
  EXPECT_GT(m2, 0.5);
  EXPECT_LT(m3, 1e-6 * m1);
}

TEST(Monogenic, MatchesSpatialConvolutionOracle) {
  for (auto [rows, cols, seed] : {std::tuple{32u, 32u, 1u}, {32u, 32u, 2u}, {24u, 31u, 3u}, {17u, 20u, 4u}}) {
    const auto img = oracle::random_image(rows, cols, seed);
    const LogGaborParams p{8.0, 0.55};
    const auto fast = monogenic(img, p);
    const auto slow = oracle::monogenic(img, p.wavelength0, p.sigma_ratio);
    EXPECT_LT(oracle::relative_error(oracle::to_double(fast.m1), slow.m1), 1e-6) << rows << "x" << cols;
    EXPECT_LT(oracle::relative_error(oracle::to_double(fast.m2), slow.m2), 1e-6) << rows << "x" << cols;
    EXPECT_LT(oracle::relative_error(oracle::to_double(fast.m3), slow.m3), 1e-6) << rows << "x" << cols;
  }
}

TEST(LocalPhase, PureEvenIsOne) { EXPECT_EQ(local_phase_image(uniform_components(0.5f, 0, 0))(0, 0), 1.0f); }

TEST(LocalPhase, EqualEvenAndOddIsHalf) {
  EXPECT_NEAR(local_phase_image(uniform_components(0.5f, 0.3f, 0.4f))(1, 1), 0.5f, 1e-7);
}

TEST(LocalPhase, PureOddTendsToZero) {
  EXPECT_NEAR(local_phase_image(uniform_components(0.0f, 1.0f, 0.0f))(0, 1), 0.0f, 1e-9);
}

TEST(LocalPhase, RangeOnRandomImages) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto lpi = local_phase_image(monogenic(oracle::random_image(40, 56, seed), {}));
    for (float v : lpi.pixels()) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(LocalPhase, ContrastInvariant) {
  const auto img = oracle::random_image(64, 64, 21);
  const auto base = local_phase_image(monogenic(img, {}));
  for (float a : {0.01f, 3.7f, 250.0f}) {
    Image scaled = img;
    for (auto& v : scaled.pixels()) v *= a;
    const auto lpi = local_phase_image(monogenic(scaled, {}));
    for (std::size_t i = 0; i < lpi.size(); ++i) EXPECT_NEAR(lpi.pixels()[i], base.pixels()[i], 1e-6);
  }
}

TEST(LocalPhase, BrightLinePeaksOnItsRow) {
  for (std::size_t n : {127u, 129u}) {
    for (double line : {20.0, 40.0, 64.0, 90.0}) {
      const auto lpi = local_phase_image(monogenic(enhance(line_image(n, n, line)), {}));
      EXPECT_LE(std::abs(double(argmax(row_means(lpi))) - line), 1.0) << n << " rows, line at " << line;
    }
  }
}

// With an even height the row half a period away is also a symmetry axis of
// the periodic image, and phase alone cannot tell it from the line.
TEST(LocalPhase, EvenHeightTiesWithTheAntipode) {
  for (double line : {20.0, 64.0, 90.0}) {
    const auto rm = row_means(local_phase_image(monogenic(enhance(line_image(128, 128, line)), {})));
    const float top = rm[argmax(rm)];
    std::vector<std::size_t> at_max;
    for (std::size_t r = 0; r < rm.size(); ++r) {
      if (rm[r] == top) at_max.push_back(r);
    }
    const auto antipode = (std::size_t(line) + 64) % 128;
    EXPECT_EQ(at_max, (std::vector<std::size_t>{std::min(std::size_t(line), antipode), std::max(std::size_t(line), antipode)}));
  }
}

TEST(LocalPhase, ShapeMismatchIsRejected) {
  MonogenicComponents m{Image(2, 2), Image(2, 3), Image(2, 2)};
  EXPECT_THROW(local_phase_image(m), DimensionError);
}
