#include "motionprep/geometry.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

using namespace motionprep;

namespace {

// Independent oracle: truncated matrix-exponential series exp([r]x).
Eigen::Matrix3d exp_series(const Eigen::Vector3d& r, int terms) {
  Eigen::Matrix3d s;
  s << 0, -r.z(), r.y(), r.z(), 0, -r.x(), -r.y(), r.x(), 0;
  Eigen::Matrix3d acc = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
  for (int k = 1; k <= terms; ++k) {
    term = (term * s) / static_cast<double>(k);
    acc += term;
  }
  return acc;
}

RotationMatrix random_rotation(std::mt19937_64& rng, double max_angle) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Vector3d axis(u(rng), u(rng), u(rng));
  while (axis.norm() < 1e-3) axis = Eigen::Vector3d(u(rng), u(rng), u(rng));
  axis.normalize();
  std::uniform_real_distribution<double> a(0.0, max_angle);
  return rodrigues_to_matrix({a(rng) * axis});
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("rodrigues_to_matrix basics") {
  CHECK((rodrigues_to_matrix({Eigen::Vector3d::Zero()}).matrix() - Eigen::Matrix3d::Identity())
            .norm() == 0.0);

  Eigen::Matrix3d quarter_z;
  quarter_z << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((rodrigues_to_matrix({{0, 0, kPi / 2}}).matrix() - quarter_z).cwiseAbs().maxCoeff() <
        1e-15);

  const Eigen::Vector3d r(0.1, 0.2, 0.3);
  const Eigen::Matrix3d oracle = exp_series(r, 30);
  CHECK((rodrigues_to_matrix({r}).matrix() - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rodrigues_to_matrix output satisfies rotation invariants") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix3d m = random_rotation(rng, kPi - 1e-3).matrix();
    CHECK((m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("matrix_to_rodrigues basics and round trip") {
  CHECK(matrix_to_rodrigues(RotationMatrix::identity()).v.norm() == 0.0);

  Eigen::Matrix3d quarter_z;
  quarter_z << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const RotationVector r = matrix_to_rodrigues(RotationMatrix::from_matrix(quarter_z));
  CHECK(r.v.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.v.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.v.z() == doctest::Approx(kPi / 2));

  std::mt19937_64 rng(42);
  for (int i = 0; i < 100; ++i) {
    const RotationMatrix R = random_rotation(rng, kPi - 1e-3);
    const RotationMatrix back = rodrigues_to_matrix(matrix_to_rodrigues(R));
    CHECK((back.matrix() - R.matrix()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("matrix_to_rodrigues near pi uses the largest-diagonal branch") {
  const Eigen::Vector3d axis = Eigen::Vector3d(1, 2, -1).normalized();
  const RotationMatrix R = rodrigues_to_matrix({(kPi - 1e-10) * axis});
  RodriguesBranch branch = RodriguesBranch::kGeneric;
  const RotationVector r = matrix_to_rodrigues(R, &branch);
  CHECK(branch == RodriguesBranch::kNearPi);
  CHECK(r.angle() <= kPi);
  // Antipodal representatives are acceptable at pi; compare matrices.
  CHECK((rodrigues_to_matrix(r).matrix() - R.matrix()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("rotation_to_homography") {
  const CameraIntrinsics K{100, 100, 320, 240};

  SUBCASE("identity rotation gives identity homography") {
    const Homography H = rotation_to_homography(K, RotationMatrix::identity());
    CHECK((H.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("matches direct 3x3 product oracle") {
    const RotationMatrix R = rodrigues_to_matrix({{0, kPi / 180.0, 0}});
    Eigen::Matrix3d Km, Kinv;
    Km << 100, 0, 320, 0, 100, 240, 0, 0, 1;
    Kinv << 0.01, 0, -3.2, 0, 0.01, -2.4, 0, 0, 1;
    Eigen::Matrix3d expected = Km * R.matrix() * Kinv;
    expected /= expected(2, 2);
    CHECK((rotation_to_homography(K, R).matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("conjugation homomorphism up to scale") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
      const RotationMatrix R1 = random_rotation(rng, 0.5);
      const RotationMatrix R2 = random_rotation(rng, 0.5);
      const Eigen::Matrix3d lhs = rotation_to_homography(K, R1 * R2).matrix();
      Eigen::Matrix3d rhs =
          rotation_to_homography(K, R1).matrix() * rotation_to_homography(K, R2).matrix();
      rhs /= rhs(2, 2);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("warp_rotational") {
  const CameraIntrinsics K{100, 100, 320, 240};

  SUBCASE("identity homography is the identity warp") {
    const PixelPoint p = warp_rotational(Homography::identity(), {100, 50});
    CHECK(p.u == 100.0);
    CHECK(p.v == 50.0);
  }

  SUBCASE("matches scalar evaluation of the homography equations") {
    const Homography H = rotation_to_homography(K, rodrigues_to_matrix({{0, kPi / 180.0, 0}}));
    const Eigen::Matrix3d& h = H.matrix();
    const double u1 = 320, v1 = 240;
    const double den = h(2, 0) * u1 + h(2, 1) * v1 + h(2, 2);
    const double u2 = (h(0, 0) * u1 + h(0, 1) * v1 + h(0, 2)) / den;
    const double v2 = (h(1, 0) * u1 + h(1, 1) * v1 + h(1, 2)) / den;
    const PixelPoint p = warp_rotational(H, {u1, v1});
    CHECK(p.u == doctest::Approx(u2).epsilon(1e-15));
    CHECK(p.v == doctest::Approx(v2).epsilon(1e-15));
  }

  SUBCASE("output is bitwise identical while a fake depth varies") {
    const Homography H = rotation_to_homography(K, rodrigues_to_matrix({{0.01, -0.02, 0.005}}));
    const PixelPoint base = warp_rotational(H, {123.4, 56.7});
    for (double fake_depth : {1.0, 5.0, 50.0}) {
      (void)fake_depth;
      const PixelPoint p = warp_rotational(H, {123.4, 56.7});
      CHECK(p.u == base.u);
      CHECK(p.v == base.v);
    }
  }

  SUBCASE("vanishing denominator throws") {
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
    h(2, 0) = 1.0;
    h(2, 2) = -100.0;  // denominator zero along u = 100
    const Homography H = Homography::from_matrix(h);
    CHECK_THROWS_AS(warp_rotational(H, {100.0, 10.0}), PointAtInfinityError);
  }
}

TEST_CASE("warp_translational") {
  const CameraIntrinsics K{100, 100, 320, 240};

  SUBCASE("zero translation is the identity") {
    const WarpResult w = warp_translational(K, Translation::metric({0, 0, 0}), 2.0, {17.5, 3.25});
    CHECK(w.point.u == 17.5);
    CHECK(w.point.v == 3.25);
    CHECK(w.depth == 2.0);
  }

  SUBCASE("principal point is a fixed point of pure forward motion") {
    const WarpResult w = warp_translational(K, Translation::metric({0, 0, 0.5}), 2.0, {320, 240});
    CHECK(w.point.u == doctest::Approx(320.0).epsilon(1e-15));
    CHECK(w.point.v == doctest::Approx(240.0).epsilon(1e-15));
    CHECK(w.depth == doctest::Approx(2.5));
  }

  SUBCASE("hand-evaluated lateral shift") {
    // u2 = (2*320 + 100*0.1) / 2 = 325
    const WarpResult w = warp_translational(K, Translation::metric({0.1, 0, 0}), 2.0, {320, 240});
    CHECK(w.point.u == doctest::Approx(325.0).epsilon(1e-15));
    CHECK(w.point.v == doctest::Approx(240.0).epsilon(1e-15));
    CHECK(w.depth == 2.0);
  }

  SUBCASE("point behind camera throws") {
    CHECK_THROWS_AS(warp_translational(K, Translation::metric({0, 0, -2.5}), 2.0, {320, 240}),
                    PointBehindCameraError);
  }
}

TEST_CASE("warp_full") {
  const CameraIntrinsics K{525, 520, 319.5, 239.5};

  SUBCASE("identity pose is the identity warp") {
    const WarpResult w =
        warp_full(K, RotationMatrix::identity(), Translation::metric({0, 0, 0}), 3.0, {10, 20});
    CHECK(w.point.u == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(w.point.v == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(w.depth == doctest::Approx(3.0));
  }

  SUBCASE("reduces to warp_rotational when t = 0") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> up(0.0, 639.0), vp(0.0, 479.0), ud(0.5, 10.0);
    for (int i = 0; i < 200; ++i) {
      const RotationMatrix R = random_rotation(rng, 0.1);
      const Homography H = rotation_to_homography(K, R);
      const PixelPoint p{up(rng), vp(rng)};
      const WarpResult w = warp_full(K, R, Translation::metric({0, 0, 0}), ud(rng), p);
      const PixelPoint q = warp_rotational(H, p);
      CHECK(flow_magnitude(w.point, q) < 1e-9);
    }
  }

  SUBCASE("reduces to warp_translational when R = I") {
    const Translation t = Translation::metric({0.03, -0.02, 0.05});
    const WarpResult a = warp_full(K, RotationMatrix::identity(), t, 2.5, {100.25, 400.5});
    const WarpResult b = warp_translational(K, t, 2.5, {100.25, 400.5});
    CHECK(a.point.u == doctest::Approx(b.point.u).epsilon(1e-14));
    CHECK(a.point.v == doctest::Approx(b.point.v).epsilon(1e-14));
    CHECK(a.depth == doctest::Approx(b.depth).epsilon(1e-14));
  }

  SUBCASE("matches homogeneous projection oracle on seeded draws") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> up(20.0, 620.0), vp(20.0, 460.0), ud(1.0, 10.0),
        ut(-0.05, 0.05);
    for (int i = 0; i < 1000; ++i) {
      const RotationMatrix R = random_rotation(rng, 0.05);
      const Translation t = Translation::metric({ut(rng), ut(rng), ut(rng)});
      const double d1 = ud(rng);
      const PixelPoint p{up(rng), vp(rng)};

      // Oracle: explicit 3D point and a 3x4 projection matrix K [R | t].
      const Eigen::Vector3d X = d1 * (K.inverse_matrix() * p.homogeneous());
      Eigen::Matrix<double, 3, 4> P;
      P.leftCols<3>() = R.matrix();
      P.col(3) = t.t;
      P = K.matrix() * P;
      const Eigen::Vector3d q = P * X.homogeneous();

      const WarpResult w = warp_full(K, R, t, d1, p);
      CHECK(flow_magnitude(w.point, {q.x() / q.z(), q.y() / q.z()}) < 1e-9);
    }
  }

  SUBCASE("point behind camera throws") {
    CHECK_THROWS_AS(warp_full(K, RotationMatrix::identity(), Translation::metric({0, 0, -5.0}),
                              2.0, {320, 240}),
                    PointBehindCameraError);
  }
}

TEST_CASE("half_rotations") {
  SUBCASE("identity splits into identities") {
    const auto [r1, r2] = half_rotations(RotationMatrix::identity());
    CHECK((r1.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r2.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("same-axis composition for 90 degrees about z") {
    const RotationMatrix R = rodrigues_to_matrix({{0, 0, kPi / 2}});
    const auto [r1, r2] = half_rotations(R);
    CHECK((r1.matrix() - rodrigues_to_matrix({{0, 0, kPi / 4}}).matrix()).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((r2.matrix() - rodrigues_to_matrix({{0, 0, -kPi / 4}}).matrix()).cwiseAbs().maxCoeff() <
          1e-12);
  }

  SUBCASE("composition identity over 1000 random rotations") {
    std::mt19937_64 rng(123);
    for (int i = 0; i < 1000; ++i) {
      const RotationMatrix R = random_rotation(rng, 150.0 * kPi / 180.0);
      const auto [r1, r2] = half_rotations(R);
      const Eigen::Matrix3d resid =
          r2.matrix() * R.matrix() * r1.matrix().transpose() - Eigen::Matrix3d::Identity();
      CHECK(resid.cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("angle near pi throws") {
    const RotationMatrix R =
        rodrigues_to_matrix({(kPi - 1e-9) * Eigen::Vector3d(0, 1, 0)});
    CHECK_THROWS_AS(half_rotations(R), AmbiguousHalfRotationError);
  }
}

TEST_CASE("flow_magnitude") {
  CHECK(flow_magnitude({0, 0}, {3, 4}) == doctest::Approx(5.0));
  CHECK(flow_magnitude({12.5, -3}, {12.5, -3}) == 0.0);
  CHECK(flow_magnitude({320, 240}, {330.5, 240}) == doctest::Approx(10.5));
}

TEST_CASE("decompose_flow") {
  const CameraIntrinsics K{525, 525, 319.5, 239.5};

  SUBCASE("identity homography and equal points give zero flows") {
    const FlowSample f = decompose_flow({10, 20}, {10, 20}, Homography::identity());
    CHECK(f.rot_mag == 0.0);
    CHECK(f.trans_mag == 0.0);
  }

  SUBCASE("pure rotation leaves no translational residual") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> up(0.0, 639.0), vp(0.0, 479.0);
    const RotationMatrix R = random_rotation(rng, 0.05);
    const Homography H = rotation_to_homography(K, R);
    for (int i = 0; i < 100; ++i) {
      const PixelPoint p1{up(rng), vp(rng)};
      const WarpResult w = warp_full(K, R, Translation::metric({0, 0, 0}), 4.0, p1);
      const FlowSample f = decompose_flow(p1, w.point, H);
      CHECK(f.trans_mag < 1e-6);
    }
  }

  SUBCASE("decomposition reconstructs the full displacement vectorially") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> up(40.0, 600.0), vp(40.0, 440.0), ud(1.0, 8.0);
    const RotationMatrix R = random_rotation(rng, 0.03);
    const Translation t = Translation::metric({0.04, -0.01, 0.02});
    const Homography H = rotation_to_homography(K, R);
    for (int i = 0; i < 200; ++i) {
      const PixelPoint p1{up(rng), vp(rng)};
      const double d1 = ud(rng);
      const PixelPoint p2 = warp_full(K, R, t, d1, p1).point;  // oracle endpoint
      const PixelPoint pr = warp_rotational(H, p1);
      const FlowSample f = decompose_flow(p1, p2, H);
      // rotational vector + translational vector = full vector
      const double full_u = (pr.u - p1.u) + (p2.u - pr.u);
      const double full_v = (pr.v - p1.v) + (p2.v - pr.v);
      CHECK(std::abs(full_u - (p2.u - p1.u)) < 1e-9);
      CHECK(std::abs(full_v - (p2.v - p1.v)) < 1e-9);
      CHECK(f.rot_mag == doctest::Approx(flow_magnitude(p1, pr)));
      CHECK(f.trans_mag == doctest::Approx(flow_magnitude(pr, p2)));
    }
  }
}

TEST_CASE("small-translation insensitivity") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> up(0.0, 639.0), vp(0.0, 479.0), ud(0.5, 10.0),
      dir(-1.0, 1.0);
  const CameraIntrinsics K{525, 500, 319.5, 239.5};
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    double max_ratio = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double d1 = ud(rng);
      Eigen::Vector3d dirv(dir(rng), dir(rng), dir(rng));
      while (dirv.norm() < 1e-3) dirv = Eigen::Vector3d(dir(rng), dir(rng), dir(rng));
      const Translation t = Translation::metric(eps * d1 * dirv.normalized());
      const PixelPoint p{up(rng), vp(rng)};
      const WarpResult w = warp_full(K, RotationMatrix::identity(), t, d1, p);
      max_ratio = std::max(max_ratio, flow_magnitude(p, w.point) / (eps * std::max(K.fx, K.fy)));
    }
    CHECK(max_ratio <= 4.0);
  }
}

TEST_CASE("translation direction normalization") {
  const Translation t = Translation::direction({3, 0, 4});
  CHECK(t.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(t.scale_known);
  CHECK_THROWS_AS(Translation::direction({0, 0, 0}), Error);
}

TEST_CASE("homography normalization flag") {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity() * 2.0;
  const Homography H = Homography::from_matrix(h);
  CHECK(H.normalized());
  CHECK(H.matrix()(2, 2) == doctest::Approx(1.0));

  Eigen::Matrix3d swap;  // invertible with h33 = 0
  swap << 0, 1, 0, 1, 0, 0, 1, 0, 0;
  swap(2, 2) = 0.0;
  swap(2, 1) = 1.0;
  swap(2, 0) = 0.0;
  swap(0, 0) = 1.0;
  swap(0, 1) = 0.0;
  swap(0, 2) = 0.0;
  swap(1, 0) = 0.0;
  swap(1, 1) = 0.0;
  swap(1, 2) = 1.0;
  const Homography H2 = Homography::from_matrix(swap);
  CHECK_FALSE(H2.normalized());
}
