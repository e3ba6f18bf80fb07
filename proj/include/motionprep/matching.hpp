#pragma once

#include <vector>

#include "motionprep/geometry.hpp"
#include "motionprep/sift.hpp"

namespace motionprep {

struct Match {
  PixelPoint p1;
  PixelPoint p2;
  float distance = 0.0f;  // descriptor distance of the matched pair
  float ratio = 0.0f;     // nearest / second-nearest distance, in [0, 1]
};

// Mutual nearest-neighbor matching with Lowe's ratio test. Returns matches
// whose ratio is strictly below ratio_max and whose endpoints are each
// other's nearest neighbors. Fewer than two candidates in b yields an empty
// result.
std::vector<Match> match_ratio_test(const std::vector<std::pair<Keypoint, Descriptor>>& a,
                                    const std::vector<std::pair<Keypoint, Descriptor>>& b,
                                    float ratio_max = 0.8f);

struct GmsParams {
  int grid_x = 20;
  int grid_y = 20;
  double support_factor = 6.0;  // tau
};

// Grid-based motion statistics filter: keeps matches whose cell pair is
// supported by enough coherent neighbors. Output is always a subset of the
// input.
std::vector<Match> gms_filter(const std::vector<Match>& matches, int width1, int height1,
                              int width2, int height2, const GmsParams& params = {});

}  // namespace motionprep
