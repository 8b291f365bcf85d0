#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lusfeat/image.hpp"

namespace lusfeat {

// Real-valued (row, col) position; row is depth.
struct Point {
  double row = 0.0;
  double col = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct EdgeSegment {
  Point p0;
  Point p1;

  void validate() const {
    if (p0 == p1) throw std::invalid_argument("edge segment endpoints coincide");
  }
};

// Fan of a convex/sector acquisition: every sample lies at
// apex + r (cos t, sin t) with r0 <= r <= r1 and |t| <= theta_max, t measured
// from straight down.
struct SectorGeometry {
  Point apex;
  double r0 = 0.0;
  double r1 = 1.0;
  double theta_max = 0.5;

  void validate() const {
    if (!(r0 >= 0.0) || !(r1 > r0)) {
      throw std::invalid_argument("sector radii must satisfy r1 > r0 >= 0");
    }
    if (!(theta_max > 0.0 && theta_max < std::numbers::pi / 2)) {
      throw std::invalid_argument("sector half-angle must lie in (0, pi/2)");
    }
  }
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class NoApexError : public GeometryError {
 public:
  explicit NoApexError(double angle)
      : GeometryError("no apex: edge lines are parallel (angle " + std::to_string(angle) + " rad)"), angle_(angle) {}

  double angle() const { return angle_; }

 private:
  double angle_;
};

namespace detail {

struct Vec {
  double r;
  double c;
};

inline Vec sub(Point a, Point b) { return {a.row - b.row, a.col - b.col}; }
inline double cross(Vec a, Vec b) { return a.r * b.c - a.c * b.r; }
inline double dot(Vec a, Vec b) { return a.r * b.r + a.c * b.c; }
inline double norm(Vec a) { return std::hypot(a.r, a.c); }
inline Vec unit(Vec a) {
  const double n = norm(a);
  return {a.r / n, a.c / n};
}

}  // namespace detail

// Bilinear sample; positions outside the pixel-center grid read as 0.
inline float sample_bilinear(const Image& img, double row, double col) {
  const double max_r = static_cast<double>(img.rows() - 1);
  const double max_c = static_cast<double>(img.cols() - 1);
  if (!(row >= 0.0 && row <= max_r && col >= 0.0 && col <= max_c)) return 0.0f;
  const auto r0 = std::min(static_cast<std::size_t>(row), img.rows() - 2);
  const auto c0 = std::min(static_cast<std::size_t>(col), img.cols() - 2);
  const double fr = row - static_cast<double>(r0);
  const double fc = col - static_cast<double>(c0);
  const double top = (1.0 - fc) * img(r0, c0) + fc * img(r0, c0 + 1);
  const double bottom = (1.0 - fc) * img(r0 + 1, c0) + fc * img(r0 + 1, c0 + 1);
  return static_cast<float>((1.0 - fr) * top + fr * bottom);
}

// Intersection of the infinite lines through the two fan edges.
inline Point estimate_apex(const EdgeSegment& left, const EdgeSegment& right) {
  left.validate();
  right.validate();
  const auto da = detail::unit(detail::sub(left.p1, left.p0));
  const auto db = detail::unit(detail::sub(right.p1, right.p0));
  const double s = detail::cross(da, db);
  if (std::abs(s) <= 1e-9) {
    throw NoApexError(std::atan2(std::abs(s), std::abs(detail::dot(da, db))));
  }
  const double t = detail::cross(detail::sub(right.p0, left.p0), db) / s;
  return {left.p0.row + t * da.r, left.p0.col + t * da.c};
}

// First row holding any value above `threshold`, if one exists.
inline std::optional<std::size_t> first_content_row(const Image& img, float threshold = 0.0f) {
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (float v : img.row(r)) {
      if (v > threshold) return r;
    }
  }
  return std::nullopt;
}

// Radii are the nearest and farthest fan content around the bisector; the
// half-angle is half the angle between the two edge lines.
inline SectorGeometry derive_geometry(Point apex, const Image& img, const EdgeSegment& left, const EdgeSegment& right,
                                      float threshold = 0.0f) {
  using namespace detail;
  const auto top = first_content_row(img, threshold);
  if (!top) throw GeometryError("invalid geometry: image has no fan content");
  if (!(apex.row < static_cast<double>(*top))) {
    throw GeometryError("invalid geometry: apex row " + std::to_string(apex.row) +
                        " is not above the first fan row " + std::to_string(*top));
  }

  auto away = [&](const EdgeSegment& e) {
    const auto a = sub(e.p0, apex);
    const auto b = sub(e.p1, apex);
    return unit(norm(a) >= norm(b) ? a : b);
  };
  const Vec dl = away(left);
  const Vec dr = away(right);
  const double half_angle = 0.5 * std::acos(std::clamp(dot(dl, dr), -1.0, 1.0));
  Vec bis{dl.r + dr.r, dl.c + dr.c};
  if (norm(bis) < 1e-12) throw GeometryError("invalid geometry: edges are opposite");
  bis = unit(bis);
  if (bis.r <= 0.0) throw GeometryError("invalid geometry: fan does not open downward");

  // Nearest and farthest content pixel centers inside the central half of
  // the fan. A single ray along the bisector is quantized to whole pixels;
  // the wedge sees many lattice points near each arc.
  const double cone = 0.5 * half_angle;
  std::optional<double> near;
  double far = 0.0;
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) {
      if (!(img(r, c) > threshold)) continue;
      const Vec d{static_cast<double>(r) - apex.row, static_cast<double>(c) - apex.col};
      const double dist = norm(d);
      if (dist == 0.0) throw GeometryError("invalid geometry: apex lies inside fan content");
      if (std::abs(std::atan2(cross(bis, d), dot(bis, d))) > cone) continue;
      near = std::min(near.value_or(dist), dist);
      far = std::max(far, dist);
    }
  }
  if (!near || !(far > *near)) throw GeometryError("invalid geometry: no fan content along the bisector");

  SectorGeometry geo{apex, *near, far, half_angle};
  geo.validate();
  return geo;
}

// Least-squares lines through the left and right support boundaries of the
// upper part of the fan, where the boundary is straight.
inline std::pair<EdgeSegment, EdgeSegment> detect_edges(const Image& img, float threshold = 0.0f,
                                                        double fit_fraction = 0.4) {
  struct Sample {
    double row, left, right;
  };
  std::vector<Sample> support;
  for (std::size_t r = 0; r < img.rows(); ++r) {
    const auto row = img.row(r);
    std::optional<std::size_t> lo, hi;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] > threshold) {
        if (!lo) lo = c;
        hi = c;
      }
    }
    if (lo) support.push_back({static_cast<double>(r), static_cast<double>(*lo), static_cast<double>(*hi)});
  }
  if (support.size() < 3) throw GeometryError("edge detection: fewer than 3 rows with fan content");

  const double first = support.front().row;
  const double last = support.back().row;
  const double limit = first + fit_fraction * (last - first);
  std::vector<Sample> fit;
  for (const auto& s : support) {
    if (s.row <= limit) fit.push_back(s);
  }
  if (fit.size() < 3) fit.assign(support.begin(), support.begin() + 3);

  auto line = [&](auto member) {
    double sr = 0, sc = 0, srr = 0, src = 0;
    for (const auto& s : fit) {
      sr += s.row;
      sc += s.*member;
      srr += s.row * s.row;
      src += s.row * (s.*member);
    }
    const double n = static_cast<double>(fit.size());
    const double det = n * srr - sr * sr;
    const double slope = det == 0.0 ? 0.0 : (n * src - sr * sc) / det;
    const double intercept = (sc - slope * sr) / n;
    const double r0 = fit.front().row;
    const double r1 = fit.back().row;
    return EdgeSegment{{r0, intercept + slope * r0}, {r1, intercept + slope * r1}};
  };
  return {line(&Sample::left), line(&Sample::right)};
}

// Output size used when none is requested: keep the input row count and take
// the column count from the arc length at the outer radius.
inline std::pair<std::size_t, std::size_t> default_output_size(const Image& img, const SectorGeometry& geo) {
  const auto cols = static_cast<std::size_t>(std::lround(2.0 * geo.theta_max * geo.r1));
  return {img.rows(), std::max<std::size_t>(cols, Image::kMinExtent)};
}

// Scan-convert the fan to a rectangle: row i is radius, column j is angle.
inline Image rectify(const Image& img, const SectorGeometry& geo, std::size_t out_rows, std::size_t out_cols) {
  geo.validate();
  Image out(out_rows, out_cols);
  const double dr = (geo.r1 - geo.r0) / static_cast<double>(out_rows - 1);
  const double dt = 2.0 * geo.theta_max / static_cast<double>(out_cols - 1);
  std::vector<double> cos_t(out_cols), sin_t(out_cols);
  for (std::size_t j = 0; j < out_cols; ++j) {
    const double t = -geo.theta_max + static_cast<double>(j) * dt;
    cos_t[j] = std::cos(t);
    sin_t[j] = std::sin(t);
  }
  for (std::size_t i = 0; i < out_rows; ++i) {
    const double r = geo.r0 + static_cast<double>(i) * dr;
    auto row = out.row(i);
    for (std::size_t j = 0; j < out_cols; ++j) {
      row[j] = sample_bilinear(img, geo.apex.row + r * cos_t[j], geo.apex.col + r * sin_t[j]);
    }
  }
  return out;
}

// Linear-probe inputs are already rectangular.
inline Image rectify_identity(const Image& img) { return img; }

// Inverse of rectify: paint a rectangular image into a fan of the given
// geometry. Pixels outside the fan are 0.
inline Image render_sector(const Image& rect, const SectorGeometry& geo, std::size_t rows, std::size_t cols) {
  geo.validate();
  Image out(rows, cols);
  const double r_scale = static_cast<double>(rect.rows() - 1) / (geo.r1 - geo.r0);
  const double t_scale = static_cast<double>(rect.cols() - 1) / (2.0 * geo.theta_max);
  for (std::size_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < cols; ++x) {
      const double dy = static_cast<double>(y) - geo.apex.row;
      const double dx = static_cast<double>(x) - geo.apex.col;
      const double r = std::hypot(dy, dx);
      const double t = std::atan2(dx, dy);
      if (r < geo.r0 || r > geo.r1 || std::abs(t) > geo.theta_max) continue;
      const double i = std::clamp((r - geo.r0) * r_scale, 0.0, static_cast<double>(rect.rows() - 1));
      const double j = std::clamp((t + geo.theta_max) * t_scale, 0.0, static_cast<double>(rect.cols() - 1));
      out(y, x) = sample_bilinear(rect, i, j);
    }
  }
  return out;
}

}  // namespace lusfeat
