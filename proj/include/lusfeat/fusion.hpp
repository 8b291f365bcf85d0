#pragma once

#include "lusfeat/image.hpp"

namespace lusfeat {

// Equal-weight sum of the image and its two feature maps, rescaled to [0, 1].
inline Image fuse(const Image& img, const Image& lpi, const Image& shibs_map) {
  require_same_shape(img, lpi, "fuse");
  require_same_shape(img, shibs_map, "fuse");
  Image sum(img.rows(), img.cols());
  const auto a = img.pixels();
  const auto b = lpi.pixels();
  const auto c = shibs_map.pixels();
  auto dst = sum.pixels();
  // (a + c) + b keeps the result bitwise symmetric in the outer arguments.
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (a[i] + c[i]) + b[i];
  return normalize(sum);
}

}  // namespace lusfeat
