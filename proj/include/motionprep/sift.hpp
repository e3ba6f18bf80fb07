#pragma once

#include <array>
#include <utility>
#include <vector>

#include "motionprep/geometry.hpp"
#include "motionprep/image.hpp"

namespace motionprep {

struct Keypoint {
  PixelPoint position;       // input-image pixels
  double scale = 0.0;        // blur sigma in input-image pixels
  double orientation = 0.0;  // radians in [-pi, pi)
  float response = 0.0f;     // interpolated DoG contrast magnitude
  int octave = 0;
  int level = 0;             // scale level within the octave
  double octave_scale = 0.0; // blur sigma in octave pixels
};

// 4x4 spatial grid of 8-bin gradient-orientation histograms, L2-normalized.
struct Descriptor {
  std::array<float, 128> vec{};

  float distance(const Descriptor& other) const;
};

struct SiftParams {
  int max_features = 2000;
  int octaves = 4;
  int scales_per_octave = 3;
  double sigma = 1.6;               // base blur of each octave
  double input_blur = 0.5;          // assumed blur of the source image
  double contrast_threshold = 0.03; // on DoG values of a [0,1] image
  double edge_ratio = 10.0;         // principal-curvature ratio limit
};

// Difference-of-Gaussians scale-space detector with gradient-orientation
// descriptors. Deterministic for fixed input and parameters; keypoints are
// returned sorted by response (descending).
// Throws DegenerateInputError for images smaller than 32x32.
std::vector<std::pair<Keypoint, Descriptor>> detect_and_describe(const GrayImage& img,
                                                                 const SiftParams& params = {});

inline std::vector<std::pair<Keypoint, Descriptor>> detect_and_describe(const GrayImage& img,
                                                                        int max_features) {
  SiftParams p;
  p.max_features = max_features;
  return detect_and_describe(img, p);
}

// Separable Gaussian blur with reflected borders. Exposed for tests and for
// the synthetic renderer.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

}  // namespace motionprep
