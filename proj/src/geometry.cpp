#include "motionprep/geometry.hpp"

#include <cmath>

namespace motionprep {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d s;
  s << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return s;
}

}  // namespace

bool CameraIntrinsics::valid() const {
  return fx > 0 && fy > 0 && std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) &&
         std::isfinite(cy);
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

Eigen::Matrix3d CameraIntrinsics::inverse_matrix() const {
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0, -cx / fx, 0, 1.0 / fy, -cy / fy, 0, 0, 1;
  return k;
}

RotationMatrix RotationMatrix::from_matrix(const Eigen::Matrix3d& m) {
  const Eigen::Matrix3d gram = m.transpose() * m;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidRotationError("matrix is not orthonormal");
  }
  if (std::abs(m.determinant() - 1.0) > 1e-9) {
    throw InvalidRotationError("matrix determinant is not +1");
  }
  return RotationMatrix(m, 0);
}

double RotationMatrix::angle() const {
  const double c = std::clamp((m_.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

Translation Translation::direction(const Eigen::Vector3d& t) {
  const double n = t.norm();
  if (n <= 0.0 || !std::isfinite(n)) {
    throw Error("cannot normalize a zero or non-finite translation");
  }
  return {t / n, false};
}

Homography Homography::from_matrix(const Eigen::Matrix3d& h) {
  if (std::abs(h.determinant()) < 1e-300) {
    throw SingularHomographyError("homography matrix is singular");
  }
  if (std::abs(h(2, 2)) > 1e-12) {
    return Homography(h / h(2, 2), true);
  }
  return Homography(h, false);
}

RotationMatrix rodrigues_to_matrix(const RotationVector& r) {
  const double theta = r.v.norm();
  const Eigen::Matrix3d s = skew(r.v);
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (theta < 1e-8) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  const Eigen::Matrix3d m = Eigen::Matrix3d::Identity() + a * s + b * (s * s);
  return RotationMatrix::from_matrix_unchecked(m);
}

RotationVector matrix_to_rodrigues(const RotationMatrix& R, RodriguesBranch* branch) {
  const Eigen::Matrix3d& m = R.matrix();
  const Eigen::Vector3d w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = 0.5 * w.norm();                                  // sin(theta)
  const double c = std::clamp((m.trace() - 1.0) * 0.5, -1.0, 1.0);  // cos(theta)
  const double theta = std::atan2(s, c);

  if (branch) *branch = RodriguesBranch::kGeneric;

  if (s > 1e-9 && theta < M_PI - 1e-9) {
    return {(theta / (2.0 * s)) * w};
  }
  if (theta < 1e-9) {
    return {Eigen::Vector3d::Zero()};
  }

  // Angle at or near pi: the skew part vanishes. Recover the axis from the
  // diagonal of (R + I)/2 = n n^T and fix signs from the largest diagonal.
  if (branch) *branch = RodriguesBranch::kNearPi;
  const Eigen::Matrix3d q = 0.5 * (m + Eigen::Matrix3d::Identity());
  int k = 0;
  q.diagonal().maxCoeff(&k);
  Eigen::Vector3d n;
  n[k] = std::sqrt(std::max(q(k, k), 0.0));
  for (int i = 0; i < 3; ++i) {
    if (i != k) n[i] = q(k, i) / n[k];
  }
  n.normalize();
  // Canonical representative: make the leading nonzero component positive.
  for (int i = 0; i < 3; ++i) {
    if (std::abs(n[i]) > 1e-12) {
      if (n[i] < 0) n = -n;
      break;
    }
  }
  return {theta * n};
}

Homography rotation_to_homography(const CameraIntrinsics& K, const RotationMatrix& R) {
  return Homography::from_matrix(K.matrix() * R.matrix() * K.inverse_matrix());
}

PixelPoint warp_rotational(const Homography& H, const PixelPoint& p) {
  const Eigen::Matrix3d& h = H.matrix();
  const double den = h(2, 0) * p.u + h(2, 1) * p.v + h(2, 2);
  if (std::abs(den) < 1e-12) {
    throw PointAtInfinityError("homography maps pixel to infinity");
  }
  return {(h(0, 0) * p.u + h(0, 1) * p.v + h(0, 2)) / den,
          (h(1, 0) * p.u + h(1, 1) * p.v + h(1, 2)) / den};
}

WarpResult warp_translational(const CameraIntrinsics& K, const Translation& t, double d1,
                              const PixelPoint& p) {
  const double d2 = d1 + t.t.z();
  if (d2 <= 0.0) {
    throw PointBehindCameraError("warped point has non-positive depth");
  }
  return {{(d1 * p.u + K.fx * t.t.x() + K.cx * t.t.z()) / d2,
           (d1 * p.v + K.fy * t.t.y() + K.cy * t.t.z()) / d2},
          d2};
}

WarpResult warp_full(const CameraIntrinsics& K, const RotationMatrix& R, const Translation& t,
                     double d1, const PixelPoint& p) {
  const Eigen::Vector3d x1 = d1 * (K.inverse_matrix() * p.homogeneous());
  const Eigen::Vector3d x2 = R.matrix() * x1 + t.t;
  if (x2.z() <= 0.0) {
    throw PointBehindCameraError("warped point has non-positive depth");
  }
  const Eigen::Vector3d q = K.matrix() * x2;
  return {{q.x() / q.z(), q.y() / q.z()}, x2.z()};
}

std::pair<RotationMatrix, RotationMatrix> half_rotations(const RotationMatrix& R) {
  if (R.angle() > M_PI - 1e-6) {
    throw AmbiguousHalfRotationError("rotation angle too close to pi to halve");
  }
  const RotationVector r = matrix_to_rodrigues(R);
  return {rodrigues_to_matrix({0.5 * r.v}), rodrigues_to_matrix({-0.5 * r.v})};
}

double flow_magnitude(const PixelPoint& p, const PixelPoint& q) {
  return std::hypot(q.u - p.u, q.v - p.v);
}

FlowSample decompose_flow(const PixelPoint& p1, const PixelPoint& p2, const Homography& H) {
  const PixelPoint pr = warp_rotational(H, p1);
  return {flow_magnitude(p1, pr), flow_magnitude(pr, p2)};
}

}  // namespace motionprep
