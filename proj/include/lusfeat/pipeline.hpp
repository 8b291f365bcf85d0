#pragma once

#include "lusfeat/energymaps.hpp"
#include "lusfeat/fusion.hpp"
#include "lusfeat/image.hpp"
#include "lusfeat/localphase.hpp"

namespace lusfeat {

struct FeatureParams {
  LogGaborParams log_gabor;
  ShadowParams shadow;
};

struct FeatureMaps {
  Image rectified;  // normalized input
  Image lpi;
  Image ibs;
  Image shadow;
  Image shibs;
  Image fused;
};

// Feature stack of one rectified frame. Only the local phase sees the
// fourth-power enhancement; backscatter and shadow use the plain intensities.
inline FeatureMaps compute_features(const Image& rectified, const FeatureParams& params = {}) {
  FeatureMaps maps;
  maps.rectified = normalize(rectified);
  maps.lpi = local_phase_image(monogenic(enhance(maps.rectified), params.log_gabor));
  maps.ibs = ibs_map(maps.rectified);
  maps.shadow = shadow_map(maps.rectified, params.shadow);
  maps.shibs = shibs(maps.shadow, maps.ibs);
  maps.fused = fuse(maps.rectified, maps.lpi, maps.shibs);
  return maps;
}

}  // namespace lusfeat
