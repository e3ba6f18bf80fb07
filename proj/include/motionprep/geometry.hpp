#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <utility>

#include "motionprep/errors.hpp"

namespace motionprep {

// Pinhole camera parameters. Pixel coordinates put integer positions at
// pixel centers; no lens distortion model.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  bool valid() const;
  Eigen::Matrix3d matrix() const;
  Eigen::Matrix3d inverse_matrix() const;

  // Same camera with all pixel quantities scaled by s (resolution change).
  CameraIntrinsics scaled(double s) const { return {fx * s, fy * s, cx * s, cy * s}; }

  bool operator==(const CameraIntrinsics&) const = default;
};

// 3x3 rotation matrix, orthonormal with determinant +1.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Eigen::Matrix3d::Identity()) {}

  static RotationMatrix identity() { return RotationMatrix(); }

  // Validates orthonormality and det = +1 to 1e-9 per entry.
  static RotationMatrix from_matrix(const Eigen::Matrix3d& m);

  // Skips validation; caller guarantees the invariant (e.g. products of
  // already-validated rotations).
  static RotationMatrix from_matrix_unchecked(const Eigen::Matrix3d& m) {
    return RotationMatrix(m, 0);
  }

  const Eigen::Matrix3d& matrix() const { return m_; }

  RotationMatrix transposed() const { return RotationMatrix(m_.transpose(), 0); }

  RotationMatrix operator*(const RotationMatrix& rhs) const {
    return RotationMatrix(m_ * rhs.m_, 0);
  }

  // Geodesic rotation angle in radians, in [0, pi].
  double angle() const;

 private:
  RotationMatrix(const Eigen::Matrix3d& m, int) : m_(m) {}
  Eigen::Matrix3d m_;
};

// Axis-angle rotation, magnitude = angle in radians.
struct RotationVector {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();

  double angle() const { return v.norm(); }
};

// Which extraction path matrix_to_rodrigues took.
enum class RodriguesBranch {
  kGeneric,       // skew-symmetric part, well conditioned
  kNearPi,        // largest-diagonal axis extraction near angle pi
};

struct Translation {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  bool scale_known = true;

  // Metric translation, arbitrary length.
  static Translation metric(const Eigen::Vector3d& t) { return {t, true}; }

  // Scale-free direction; normalized to unit length.
  static Translation direction(const Eigen::Vector3d& t);

  double norm() const { return t.norm(); }
};

// Invertible 3x3 plane-to-plane map. Normalized so h33 = 1 whenever
// |h33| > 1e-12; otherwise stored as-is with normalized() == false.
class Homography {
 public:
  Homography() : h_(Eigen::Matrix3d::Identity()), normalized_(true) {}

  static Homography identity() { return Homography(); }

  // Throws SingularHomographyError when the matrix is not invertible.
  static Homography from_matrix(const Eigen::Matrix3d& h);

  const Eigen::Matrix3d& matrix() const { return h_; }
  bool normalized() const { return normalized_; }

  Homography inverse() const { return from_matrix(h_.inverse()); }

  Homography operator*(const Homography& rhs) const { return from_matrix(h_ * rhs.h_); }

 private:
  Homography(const Eigen::Matrix3d& h, bool normalized) : h_(h), normalized_(normalized) {}
  Eigen::Matrix3d h_;
  bool normalized_;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;

  Eigen::Vector3d homogeneous() const { return {u, v, 1.0}; }

  bool operator==(const PixelPoint&) const = default;
};

// Per-point decomposition of warping flow into the depth-independent
// rotational component and the depth-coupled translational residual.
struct FlowSample {
  double rot_mag = 0.0;    // px
  double trans_mag = 0.0;  // px
};

struct WarpResult {
  PixelPoint point;
  double depth = 0.0;
};

// Axis-angle to rotation matrix (Rodrigues). Zero vector maps to identity.
RotationMatrix rodrigues_to_matrix(const RotationVector& r);

// Inverse of the above; result angle lies in [0, pi]. Near angle pi the
// axis sign is resolved by the largest-diagonal rule and the branch taken
// is reported through `branch` when non-null.
RotationVector matrix_to_rodrigues(const RotationMatrix& R, RodriguesBranch* branch = nullptr);

// H = K * R * K^-1, the pure-rotation image-plane map.
Homography rotation_to_homography(const CameraIntrinsics& K, const RotationMatrix& R);

// Applies a homography to a pixel. Depth never enters.
// Throws PointAtInfinityError when the projective denominator vanishes.
PixelPoint warp_rotational(const Homography& H, const PixelPoint& p);

// Pure-translational warp; couples the pixel motion with depth d1.
// Throws PointBehindCameraError when d1 + t3 <= 0.
WarpResult warp_translational(const CameraIntrinsics& K, const Translation& t, double d1,
                              const PixelPoint& p);

// General rigid warp: back-project at depth d1, rotate, translate, project.
// Throws PointBehindCameraError when the warped depth is non-positive.
WarpResult warp_full(const CameraIntrinsics& K, const RotationMatrix& R, const Translation& t,
                     double d1, const PixelPoint& p);

// Splits R into (R1, R2) = (rot(r/2), rot(-r/2)) so that R2 * R * R1^T = I.
// Throws AmbiguousHalfRotationError when the angle is within 1e-6 of pi.
std::pair<RotationMatrix, RotationMatrix> half_rotations(const RotationMatrix& R);

// Euclidean pixel distance.
double flow_magnitude(const PixelPoint& p, const PixelPoint& q);

// rot_mag = |p1 -> H p1|, trans_mag = |H p1 -> p2|. The two flow vectors
// sum to the full match displacement by construction.
FlowSample decompose_flow(const PixelPoint& p1, const PixelPoint& p2, const Homography& H);

}  // namespace motionprep
