#include "motionprep/matching.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace motionprep {

std::vector<Match> match_ratio_test(const std::vector<std::pair<Keypoint, Descriptor>>& a,
                                    const std::vector<std::pair<Keypoint, Descriptor>>& b,
                                    float ratio_max) {
  std::vector<Match> matches;
  if (a.empty() || b.size() < 2) return matches;

  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());

  Eigen::MatrixXf da(na, 128), db(nb, 128);
  for (int i = 0; i < na; ++i) {
    da.row(i) = Eigen::Map<const Eigen::RowVectorXf>(a[i].second.vec.data(), 128);
  }
  for (int j = 0; j < nb; ++j) {
    db.row(j) = Eigen::Map<const Eigen::RowVectorXf>(b[j].second.vec.data(), 128);
  }
  // unit descriptors: dist^2 = 2 - 2 * dot
  const Eigen::MatrixXf dots = da * db.transpose();

  std::vector<int> best_b_for_a(na, -1);
  std::vector<float> ratio_for_a(na, 0.0f);
  std::vector<float> dist_for_a(na, 0.0f);
  std::vector<int> best_a_for_b(nb, -1);
  std::vector<float> best_dot_for_b(nb, -std::numeric_limits<float>::infinity());

  for (int i = 0; i < na; ++i) {
    int best = -1, second = -1;
    float best_dot = -std::numeric_limits<float>::infinity();
    float second_dot = -std::numeric_limits<float>::infinity();
    for (int j = 0; j < nb; ++j) {
      const float d = dots(i, j);
      if (d > best_dot) {
        second = best;
        second_dot = best_dot;
        best = j;
        best_dot = d;
      } else if (d > second_dot) {
        second = j;
        second_dot = d;
      }
    }
    // The Gram matrix locates the neighbors; exact double-precision
    // distances avoid float cancellation near zero.
    const float d1 = a[i].second.distance(b[best].second);
    const float d2 = a[i].second.distance(b[second].second);
    best_b_for_a[i] = best;
    dist_for_a[i] = d1;
    ratio_for_a[i] = d2 > 0.0f ? d1 / d2 : (d1 > 0.0f ? 1.0f : 0.0f);
  }
  for (int j = 0; j < nb; ++j) {
    for (int i = 0; i < na; ++i) {
      if (dots(i, j) > best_dot_for_b[j]) {
        best_dot_for_b[j] = dots(i, j);
        best_a_for_b[j] = i;
      }
    }
  }

  for (int i = 0; i < na; ++i) {
    const int j = best_b_for_a[i];
    if (j < 0 || best_a_for_b[j] != i) continue;  // mutual-best check
    if (ratio_for_a[i] >= ratio_max) continue;
    matches.push_back(
        {a[i].first.position, b[j].first.position, dist_for_a[i], ratio_for_a[i]});
  }
  return matches;
}

std::vector<Match> gms_filter(const std::vector<Match>& matches, int width1, int height1,
                              int width2, int height2, const GmsParams& params) {
  std::vector<Match> kept;
  if (matches.empty()) return kept;

  const int gx = params.grid_x;
  const int gy = params.grid_y;
  const int cells = gx * gy;
  const int n = static_cast<int>(matches.size());

  std::vector<bool> keep(n, false);

  // Four half-cell grid offsets compensate for quantization at cell borders.
  const double shifts[4][2] = {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}};
  for (const auto& shift : shifts) {
    const auto cell_of = [&](const PixelPoint& p, int w, int h) -> int {
      const int cx = static_cast<int>(gx * p.u / w + shift[0]);
      const int cy = static_cast<int>(gy * p.v / h + shift[1]);
      if (cx < 0 || cx >= gx || cy < 0 || cy >= gy) return -1;
      return cy * gx + cx;
    };

    // sparse per-cell target lists to avoid a cells x cells dense table
    std::vector<int> features_per_cell(cells, 0);
    std::vector<std::vector<std::pair<int, std::vector<int>>>> table(cells);
    for (int m = 0; m < n; ++m) {
      const int c1 = cell_of(matches[m].p1, width1, height1);
      const int c2 = cell_of(matches[m].p2, width2, height2);
      if (c1 < 0 || c2 < 0) continue;
      features_per_cell[c1]++;
      auto& row = table[c1];
      auto it = std::find_if(row.begin(), row.end(),
                             [&](const auto& e) { return e.first == c2; });
      if (it == row.end()) {
        row.push_back({c2, {m}});
      } else {
        it->second.push_back(m);
      }
    }

    const auto count_between = [&](int c1, int c2) -> int {
      for (const auto& e : table[c1]) {
        if (e.first == c2) return static_cast<int>(e.second.size());
      }
      return 0;
    };

    // match indices per left cell for the keep pass
    std::vector<int> match_c1(n), match_c2(n);
    for (int m = 0; m < n; ++m) {
      match_c1[m] = cell_of(matches[m].p1, width1, height1);
      match_c2[m] = cell_of(matches[m].p2, width2, height2);
    }

    // support of a candidate cell pair: matches between the two 3x3
    // neighborhoods at corresponding offsets
    const auto region_support = [&](int cx, int cy, int bx, int by) {
      int score = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = cx + dx, ny = cy + dy;
          const int mx = bx + dx, my = by + dy;
          if (nx < 0 || nx >= gx || ny < 0 || ny >= gy || mx < 0 || mx >= gx || my < 0 ||
              my >= gy) {
            continue;
          }
          score += count_between(ny * gx + nx, my * gx + mx);
        }
      }
      return score;
    };

    for (int cy = 0; cy < gy; ++cy) {
      for (int cx = 0; cx < gx; ++cx) {
        const int c1 = cy * gx + cx;
        if (table[c1].empty()) continue;

        // target cell with the strongest neighborhood support
        int c2 = -1, score = -1;
        for (const auto& e : table[c1]) {
          const int s = region_support(cx, cy, e.first % gx, e.first / gx);
          if (s > score) {
            score = s;
            c2 = e.first;
          }
        }
        const int bx = c2 % gx;
        const int by = c2 / gx;

        int neighborhood_features = 0;
        int valid_neighbors = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || nx >= gx || ny < 0 || ny >= gy) continue;
            neighborhood_features += features_per_cell[ny * gx + nx];
            valid_neighbors++;
          }
        }
        // threshold prorated by the truncated-neighborhood fraction so
        // border cells are judged against their actual support area
        const double mean_per_cell =
            static_cast<double>(neighborhood_features) / std::max(1, valid_neighbors);
        const double thresh =
            params.support_factor * std::sqrt(mean_per_cell) * (valid_neighbors / 9.0);
        if (score <= thresh) continue;

        // keep matches from the neighborhood whose own cell displacement
        // agrees with the accepted pair displacement within one cell
        const int vx = bx - cx, vy = by - cy;
        for (int m = 0; m < n; ++m) {
          if (match_c1[m] < 0 || match_c2[m] < 0 || keep[m]) continue;
          const int sx = match_c1[m] % gx, sy = match_c1[m] / gx;
          const int tx = match_c2[m] % gx, ty = match_c2[m] / gx;
          if (std::abs(sx - cx) <= 1 && std::abs(sy - cy) <= 1 &&
              std::abs(tx - sx - vx) <= 1 && std::abs(ty - sy - vy) <= 1) {
            keep[m] = true;
          }
        }
      }
    }
  }

  for (int m = 0; m < n; ++m) {
    if (keep[m]) kept.push_back(matches[m]);
  }
  return kept;
}

}  // namespace motionprep
