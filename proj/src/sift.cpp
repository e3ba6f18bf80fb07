#include "motionprep/sift.hpp"

#include <algorithm>
#include <cmath>

namespace motionprep {

namespace {

constexpr int kBorder = 5;  // extrema must stay this far from octave edges
constexpr int kMaxInterpSteps = 5;
constexpr int kOriBins = 36;
constexpr double kOriSigmaFactor = 1.5;
constexpr double kOriRadiusFactor = 3.0 * kOriSigmaFactor;
constexpr double kOriPeakRatio = 0.8;
constexpr int kDescrWidth = 4;
constexpr int kDescrBins = 8;
constexpr double kDescrScaleFactor = 3.0;
constexpr double kDescrMagThreshold = 0.2;

int reflect(int i, int n) {
  // reflect-101: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

GrayImage downsample2(const GrayImage& img) {
  GrayImage out(std::max(1, img.width / 2), std::max(1, img.height / 2), 1);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = img.at(2 * x, 2 * y);
    }
  }
  return out;
}

struct Pyramid {
  std::vector<std::vector<GrayImage>> gauss;  // [octave][level]
  std::vector<std::vector<GrayImage>> dog;    // [octave][level]
};

Pyramid build_pyramid(const GrayImage& img, const SiftParams& p) {
  const int levels = p.scales_per_octave + 3;
  const double k = std::pow(2.0, 1.0 / p.scales_per_octave);

  std::vector<double> inc(levels);
  inc[0] = std::sqrt(std::max(p.sigma * p.sigma - p.input_blur * p.input_blur, 0.01));
  for (int i = 1; i < levels; ++i) {
    const double prev = p.sigma * std::pow(k, i - 1);
    inc[i] = prev * std::sqrt(k * k - 1.0);
  }

  Pyramid pyr;
  pyr.gauss.resize(p.octaves);
  pyr.dog.resize(p.octaves);
  for (int o = 0; o < p.octaves; ++o) {
    auto& g = pyr.gauss[o];
    g.resize(levels);
    if (o == 0) {
      g[0] = gaussian_blur(img, inc[0]);
    } else {
      // level scales_per_octave of the previous octave has blur 2*sigma,
      // which becomes sigma again after halving the resolution
      g[0] = downsample2(pyr.gauss[o - 1][p.scales_per_octave]);
    }
    for (int i = 1; i < levels; ++i) {
      g[i] = gaussian_blur(g[i - 1], inc[i]);
    }
    auto& d = pyr.dog[o];
    d.resize(levels - 1);
    for (int i = 0; i + 1 < levels; ++i) {
      d[i] = GrayImage(g[i].width, g[i].height, 1);
      for (std::size_t j = 0; j < d[i].data.size(); ++j) {
        d[i].data[j] = g[i + 1].data[j] - g[i].data[j];
      }
    }
  }
  return pyr;
}

// Quadratic fit around a discrete extremum. Returns false when the point
// drifts outside the usable region or fails the contrast / edge checks.
bool refine_extremum(const std::vector<GrayImage>& dog, const SiftParams& p, int level, int x,
                     int y, Keypoint* kp) {
  double xi = 0, xr = 0, xc = 0;
  double contrast = 0;
  const int w = dog[0].width;
  const int h = dog[0].height;

  int iter = 0;
  for (; iter < kMaxInterpSteps; ++iter) {
    const GrayImage& cur = dog[level];
    const GrayImage& prev = dog[level - 1];
    const GrayImage& next = dog[level + 1];

    const double dx = 0.5 * (cur.at(x + 1, y) - cur.at(x - 1, y));
    const double dy = 0.5 * (cur.at(x, y + 1) - cur.at(x, y - 1));
    const double ds = 0.5 * (next.at(x, y) - prev.at(x, y));

    const double v = cur.at(x, y);
    const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - 2 * v;
    const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - 2 * v;
    const double dss = next.at(x, y) + prev.at(x, y) - 2 * v;
    const double dxy =
        0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) +
                cur.at(x - 1, y - 1));
    const double dxs =
        0.25 * (next.at(x + 1, y) - next.at(x - 1, y) - prev.at(x + 1, y) + prev.at(x - 1, y));
    const double dys =
        0.25 * (next.at(x, y + 1) - next.at(x, y - 1) - prev.at(x, y + 1) + prev.at(x, y - 1));

    Eigen::Matrix3d H;
    H << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;
    const Eigen::Vector3d g(dx, dy, ds);
    if (std::abs(H.determinant()) < 1e-30) return false;
    const Eigen::Vector3d offset = -H.inverse() * g;
    xc = offset.x();
    xr = offset.y();
    xi = offset.z();

    if (std::abs(xc) < 0.5 && std::abs(xr) < 0.5 && std::abs(xi) < 0.5) {
      contrast = v + 0.5 * g.dot(offset);
      break;
    }
    if (std::abs(xc) > 2 || std::abs(xr) > 2 || std::abs(xi) > 2) return false;

    x += static_cast<int>(std::lround(xc));
    y += static_cast<int>(std::lround(xr));
    level += static_cast<int>(std::lround(xi));
    if (level < 1 || level > static_cast<int>(dog.size()) - 2 || x < kBorder ||
        x >= w - kBorder || y < kBorder || y >= h - kBorder) {
      return false;
    }
  }
  if (iter == kMaxInterpSteps) return false;

  if (std::abs(contrast) < p.contrast_threshold) return false;

  {
    const GrayImage& cur = dog[level];
    const double v = cur.at(x, y);
    const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - 2 * v;
    const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - 2 * v;
    const double dxy =
        0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) +
                cur.at(x - 1, y - 1));
    const double tr = dxx + dyy;
    const double det = dxx * dyy - dxy * dxy;
    const double r = p.edge_ratio;
    if (det <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det) return false;
  }

  kp->position = {static_cast<double>(x) + xc, static_cast<double>(y) + xr};
  kp->level = level;
  kp->octave_scale =
      p.sigma * std::pow(2.0, (static_cast<double>(level) + xi) / p.scales_per_octave);
  kp->response = static_cast<float>(std::abs(contrast));
  return true;
}

// 36-bin gradient-orientation histogram; returns the peak orientations.
std::vector<double> dominant_orientations(const GrayImage& g, double x, double y,
                                          double octave_scale) {
  const double sigma = kOriSigmaFactor * octave_scale;
  const int radius = static_cast<int>(std::lround(kOriRadiusFactor * octave_scale));
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));

  std::array<double, kOriBins> hist{};
  for (int dy = -radius; dy <= radius; ++dy) {
    const int py = cy + dy;
    if (py < 1 || py >= g.height - 1) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int px = cx + dx;
      if (px < 1 || px >= g.width - 1) continue;
      const double gx = g.at(px + 1, py) - g.at(px - 1, py);
      const double gy = g.at(px, py + 1) - g.at(px, py - 1);
      const double mag = std::hypot(gx, gy);
      const double theta = std::atan2(gy, gx);
      const double weight = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      int bin = static_cast<int>(std::floor((theta + M_PI) / (2.0 * M_PI) * kOriBins));
      bin = std::clamp(bin, 0, kOriBins - 1);
      hist[bin] += weight * mag;
    }
  }

  // circular [1 4 6 4 1]/16 smoothing, applied twice
  for (int pass = 0; pass < 2; ++pass) {
    std::array<double, kOriBins> sm{};
    for (int i = 0; i < kOriBins; ++i) {
      const auto at = [&](int j) { return hist[(j + kOriBins) % kOriBins]; };
      sm[i] = (at(i - 2) + at(i + 2) + 4.0 * (at(i - 1) + at(i + 1)) + 6.0 * at(i)) / 16.0;
    }
    hist = sm;
  }

  const double peak = *std::max_element(hist.begin(), hist.end());
  std::vector<double> orientations;
  if (peak <= 0) return orientations;
  for (int i = 0; i < kOriBins; ++i) {
    const double l = hist[(i + kOriBins - 1) % kOriBins];
    const double c = hist[i];
    const double r = hist[(i + 1) % kOriBins];
    if (c > l && c > r && c >= kOriPeakRatio * peak) {
      const double denom = l - 2 * c + r;
      const double shift = std::abs(denom) > 1e-12 ? 0.5 * (l - r) / denom : 0.0;
      double theta = (static_cast<double>(i) + 0.5 + shift) / kOriBins * 2.0 * M_PI - M_PI;
      if (theta >= M_PI) theta -= 2.0 * M_PI;
      if (theta < -M_PI) theta += 2.0 * M_PI;
      orientations.push_back(theta);
    }
  }
  return orientations;
}

Descriptor compute_descriptor(const GrayImage& g, double x, double y, double octave_scale,
                              double orientation) {
  const double hist_width = kDescrScaleFactor * octave_scale;
  const double cos_t = std::cos(-orientation);
  const double sin_t = std::sin(-orientation);
  const int radius =
      static_cast<int>(std::lround(hist_width * std::sqrt(2.0) * (kDescrWidth + 1) * 0.5));
  const double bins_per_rad = kDescrBins / (2.0 * M_PI);
  const double exp_scale = -2.0 / (kDescrWidth * kDescrWidth);

  // one-cell padding so the trilinear scatter never writes out of range
  constexpr int D = kDescrWidth + 2;
  std::array<double, D * D * kDescrBins> hist{};
  const auto hidx = [&](int r, int c, int o) { return (r * D + c) * kDescrBins + o; };

  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));

  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const double rx = (cos_t * dx - sin_t * dy) / hist_width;
      const double ry = (sin_t * dx + cos_t * dy) / hist_width;
      const double rbin = ry + kDescrWidth / 2.0 - 0.5;
      const double cbin = rx + kDescrWidth / 2.0 - 0.5;
      if (rbin <= -1 || rbin >= kDescrWidth || cbin <= -1 || cbin >= kDescrWidth) continue;

      const int px = cx + dx;
      const int py = cy + dy;
      if (px < 1 || px >= g.width - 1 || py < 1 || py >= g.height - 1) continue;

      const double gx = g.at(px + 1, py) - g.at(px - 1, py);
      const double gy = g.at(px, py + 1) - g.at(px, py - 1);
      const double mag = std::hypot(gx, gy);
      const double theta = std::atan2(gy, gx) + orientation;

      const double weight = std::exp((rx * rx + ry * ry) * exp_scale) * mag;
      double obin = (theta + M_PI) * bins_per_rad;
      while (obin < 0) obin += kDescrBins;
      while (obin >= kDescrBins) obin -= kDescrBins;

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      const int o0 = static_cast<int>(std::floor(obin));
      const double fr = rbin - r0;
      const double fc = cbin - c0;
      const double fo = obin - o0;

      for (int ir = 0; ir <= 1; ++ir) {
        const int rr = r0 + ir + 1;
        if (rr < 0 || rr >= D) continue;
        const double wr = weight * (ir ? fr : 1.0 - fr);
        for (int ic = 0; ic <= 1; ++ic) {
          const int cc = c0 + ic + 1;
          if (cc < 0 || cc >= D) continue;
          const double wc = wr * (ic ? fc : 1.0 - fc);
          for (int io = 0; io <= 1; ++io) {
            hist[hidx(rr, cc, (o0 + io) % kDescrBins)] += wc * (io ? fo : 1.0 - fo);
          }
        }
      }
    }
  }

  Descriptor desc;
  int idx = 0;
  for (int r = 1; r <= kDescrWidth; ++r) {
    for (int c = 1; c <= kDescrWidth; ++c) {
      for (int o = 0; o < kDescrBins; ++o) {
        desc.vec[idx++] = static_cast<float>(hist[hidx(r, c, o)]);
      }
    }
  }

  const auto norm = [&]() {
    double s = 0;
    for (float v : desc.vec) s += static_cast<double>(v) * v;
    return std::sqrt(s);
  };
  double n = norm();
  if (n < 1e-12) return desc;  // flat patch; contrast check filters these upstream
  const float clamp = static_cast<float>(kDescrMagThreshold * n);
  for (float& v : desc.vec) v = std::min(v, clamp);
  n = norm();
  for (float& v : desc.vec) v = static_cast<float>(v / n);
  return desc;
}

}  // namespace

float Descriptor::distance(const Descriptor& other) const {
  double s = 0;
  for (int i = 0; i < 128; ++i) {
    const double d = static_cast<double>(vec[i]) - other.vec[i];
    s += d * d;
  }
  return static_cast<float>(std::sqrt(s));
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (sigma <= 0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<float> kernel(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    kernel[i + radius] = static_cast<float>(v);
    sum += v;
  }
  for (float& v : kernel) v = static_cast<float>(v / sum);

  GrayImage tmp(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      float acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * img.at(reflect(x + i, img.width), y);
      }
      tmp.at(x, y) = acc;
    }
  }
  GrayImage out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      float acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * tmp.at(x, reflect(y + i, img.height));
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

std::vector<std::pair<Keypoint, Descriptor>> detect_and_describe(const GrayImage& img,
                                                                 const SiftParams& params) {
  if (img.channels != 1) throw DegenerateInputError("detector expects a grayscale image");
  if (img.width < 32 || img.height < 32) {
    throw DegenerateInputError("image too small for scale-space detection (min 32x32)");
  }

  // Drop octaves whose extent falls below the usable extrema window.
  SiftParams p = params;
  int max_octaves = 1;
  for (int s = std::min(img.width, img.height) / 2; s > 4 * kBorder && max_octaves < p.octaves;
       s /= 2) {
    ++max_octaves;
  }
  p.octaves = std::min(p.octaves, max_octaves);

  const Pyramid pyr = build_pyramid(img, p);
  const float prefilter = static_cast<float>(0.5 * p.contrast_threshold);

  std::vector<Keypoint> keypoints;
  for (int o = 0; o < p.octaves; ++o) {
    const auto& dog = pyr.dog[o];
    const int w = dog[0].width;
    const int h = dog[0].height;
    for (int level = 1; level <= p.scales_per_octave; ++level) {
      const GrayImage& cur = dog[level];
      const GrayImage& prev = dog[level - 1];
      const GrayImage& next = dog[level + 1];
      for (int y = kBorder; y < h - kBorder; ++y) {
        for (int x = kBorder; x < w - kBorder; ++x) {
          const float v = cur.at(x, y);
          if (std::abs(v) <= prefilter) continue;

          bool is_max = true, is_min = true;
          for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const float a = prev.at(x + dx, y + dy);
              const float b = cur.at(x + dx, y + dy);
              const float c = next.at(x + dx, y + dy);
              if (v < a || v < b || v < c) is_max = false;
              if (v > a || v > b || v > c) is_min = false;
            }
          }
          if (!is_max && !is_min) continue;

          Keypoint kp;
          kp.octave = o;
          if (!refine_extremum(dog, p, level, x, y, &kp)) continue;

          const GrayImage& gimg = pyr.gauss[o][kp.level];
          const auto orientations =
              dominant_orientations(gimg, kp.position.u, kp.position.v, kp.octave_scale);
          const double octave_factor = std::pow(2.0, o);
          for (double theta : orientations) {
            Keypoint out = kp;
            out.orientation = theta;
            out.scale = kp.octave_scale * octave_factor;
            out.position = {kp.position.u * octave_factor, kp.position.v * octave_factor};
            keypoints.push_back(out);
          }
        }
      }
    }
  }

  std::sort(keypoints.begin(), keypoints.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.position.u != b.position.u) return a.position.u < b.position.u;
    if (a.position.v != b.position.v) return a.position.v < b.position.v;
    if (a.scale != b.scale) return a.scale < b.scale;
    return a.orientation < b.orientation;
  });
  if (static_cast<int>(keypoints.size()) > p.max_features) {
    keypoints.resize(p.max_features);
  }

  std::vector<std::pair<Keypoint, Descriptor>> result;
  result.reserve(keypoints.size());
  for (const Keypoint& kp : keypoints) {
    const GrayImage& gimg = pyr.gauss[kp.octave][kp.level];
    const double inv = std::pow(2.0, -kp.octave);
    Descriptor d = compute_descriptor(gimg, kp.position.u * inv, kp.position.v * inv,
                                      kp.octave_scale, kp.orientation);
    result.emplace_back(kp, d);
  }
  return result;
}

}  // namespace motionprep
