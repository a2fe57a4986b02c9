#include "hopflab/liegroup.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

using hopflab::Matrix;
using hopflab::Rng;
using hopflab::Vector;
namespace lie = hopflab::liegroup;
using lie::kPi;

namespace {

// independent oracle: pade + scaling/squaring from eigen's unsupported module
Matrix expm_oracle(const Matrix& a) { return a.exp(); }

Matrix rot2(double t) {
  Matrix r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

Matrix planar_skew(int n, const std::vector<double>& angles) {
  Matrix a = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < angles.size(); ++j) {
    a(2 * j, 2 * j + 1) = -angles[j];
    a(2 * j + 1, 2 * j) = angles[j];
  }
  return a;
}

}  // namespace

TEST_CASE("skew_spectral recovers planar data") {
  Matrix a = planar_skew(2, {kPi});
  auto sp = lie::skew_spectral(a);
  REQUIRE(sp.angles.size() == 1);
  CHECK(sp.angles[0] == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(sp.kernel_dim == 0);
  CHECK((sp.reconstruct() - a).norm() <= 1e-12);
}

TEST_CASE("skew_spectral handles kernels, degeneracy and ordering") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;  // odd sizes force kernels
    Matrix a = rng.skew(n);
    auto sp = lie::skew_spectral(a);
    CHECK(hopflab::orthogonality_residual(sp.frame) <= 1e-12);
    CHECK((sp.reconstruct() - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
    CHECK(static_cast<int>(2 * sp.angles.size()) + sp.kernel_dim == n);
    if (n % 2 == 1) CHECK(sp.kernel_dim >= 1);
    for (std::size_t j = 1; j < sp.angles.size(); ++j)
      CHECK(sp.angles[j - 1] >= sp.angles[j]);
    // angles must match the eigenvalues of a^T a computed independently;
    // the kernel noise floor in angle units is sqrt(eps * lam_max)
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
    const double sigma = std::sqrt(std::max(0.0, es.eigenvalues()(n - 1)));
    std::vector<double> expected;
    for (int i = n - 1; i >= 0; --i) {
      const double lam = std::max(0.0, es.eigenvalues()(i));
      if (std::sqrt(lam) > 1e-6 * std::max(1.0, sigma)) expected.push_back(std::sqrt(lam));
    }
    REQUIRE(expected.size() == 2 * sp.angles.size());
    for (std::size_t j = 0; j < sp.angles.size(); ++j)
      CHECK(sp.angles[j] == doctest::Approx(expected[2 * j]).epsilon(1e-9));
  }

  // exactly repeated angles: the pairing must still produce an orthogonal frame
  Matrix d = planar_skew(8, {2.0, 2.0, 2.0, 0.5});
  Rng rng2(11);
  Matrix q = lie::expm(rng2.skew(8));
  Matrix a = q * d * q.transpose();
  a = 0.5 * (a - a.transpose());
  auto sp = lie::skew_spectral(a);
  REQUIRE(sp.angles.size() == 4);
  CHECK(hopflab::orthogonality_residual(sp.frame) <= 1e-11);
  CHECK((sp.reconstruct() - a).norm() <= 1e-10);
  CHECK(sp.angles[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sp.angles[2] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sp.angles[3] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("skew_spectral rejects non-skew input") {
  Matrix m = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(lie::skew_spectral(m), hopflab::InvalidInput);
}

TEST_CASE("expm matches the pade oracle and lands in the group") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 15;
    Matrix a = rng.skew(n);
    Matrix e = lie::expm(a);
    CHECK((e - expm_oracle(a)).norm() <= 1e-10 * std::max(1.0, a.norm()));
    CHECK(hopflab::orthogonality_residual(e) <= 1e-12);
    CHECK(e.determinant() == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK((lie::expm(Matrix::Zero(4, 4)) - Matrix::Identity(4, 4)).norm() == 0.0);
  CHECK((lie::expm(planar_skew(2, {kPi})) + Matrix::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("logm round trips inside the principal branch") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 9;
    Matrix a = rng.skew(n);
    auto sp = lie::skew_spectral(a);
    if (!sp.angles.empty() && sp.angles[0] > 0.95 * kPi) a *= (0.9 * kPi / sp.angles[0]);
    Matrix r = lie::expm(a);
    Matrix l = lie::logm(r);
    CHECK((l - a).norm() <= 1e-9 * std::max(1.0, a.norm()));
    CHECK((lie::expm(l) - r).norm() <= 1e-9);
    CHECK((l + l.transpose()).norm() == 0.0);
  }
}

TEST_CASE("logm close to the branch boundary stays accurate") {
  Matrix a = planar_skew(4, {kPi - 0.1, 0.3});
  Matrix r = lie::expm(a);
  CHECK((lie::logm(r) - a).norm() <= 1e-9);
}

TEST_CASE("logm refuses the angle-pi branch point") {
  CHECK_THROWS_AS(lie::logm(-Matrix::Identity(2, 2)), hopflab::BranchError);
  Matrix a = planar_skew(4, {kPi, 0.4});
  CHECK_THROWS_AS(lie::logm(lie::expm(a)), hopflab::BranchError);
}

TEST_CASE("logm rejects non-rotations") {
  CHECK_THROWS_AS(lie::logm(2.0 * Matrix::Identity(3, 3)), hopflab::InvalidInput);
  Matrix refl = Matrix::Identity(3, 3);
  refl(0, 0) = -1.0;
  CHECK_THROWS_AS(lie::logm(refl), hopflab::InvalidInput);
}

TEST_CASE("logm_completed covers the -1 eigenspace") {
  bool completed = false;
  Matrix r = -Matrix::Identity(4, 4);
  Matrix l = lie::logm_completed(r, &completed);
  CHECK(completed);
  CHECK((lie::expm(l) - r).norm() <= 1e-12);

  // mixed spectrum: identity block + flipped block
  Matrix mix = Matrix::Identity(6, 6);
  mix(4, 4) = -1.0;
  mix(5, 5) = -1.0;
  completed = false;
  l = lie::logm_completed(mix, &completed);
  CHECK(completed);
  CHECK((lie::expm(l) - mix).norm() <= 1e-12);

  // regular input: agrees with the principal log, no completion
  Matrix a = planar_skew(4, {1.0, 0.25});
  completed = true;
  l = lie::logm_completed(lie::expm(a), &completed);
  CHECK(!completed);
  CHECK((l - a).norm() <= 1e-10);
}

TEST_CASE("distance between the identity and its negative in so(2)") {
  CHECK_THROWS_AS(lie::distance(Matrix::Identity(2, 2), -Matrix::Identity(2, 2)),
                  hopflab::BranchError);
  // just inside the branch the value approaches the supremum pi * sqrt(2)
  const double theta = kPi - 1e-4;
  const double d = lie::distance(Matrix::Identity(2, 2), rot2(theta));
  CHECK(d == doctest::Approx(theta * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(d < kPi * std::sqrt(2.0));
  CHECK(d > kPi * std::sqrt(2.0) - 3e-4);
}

TEST_CASE("distance is bi-invariant") {
  Rng rng(9);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 4 + trial % 4;
    Matrix p = lie::expm(0.4 * rng.skew(n));
    Matrix q = lie::expm(0.4 * rng.skew(n));
    Matrix g = lie::expm(rng.skew(n));
    const double d = lie::distance(p, q);
    CHECK(lie::distance(g * p, g * q) == doctest::Approx(d).epsilon(1e-9));
    CHECK(lie::distance(p * g, q * g) == doctest::Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("geodesic midpoint is equidistant and exact on block rotations") {
  Rng rng(13);
  Matrix p = lie::expm(0.3 * rng.skew(6));
  Matrix q = lie::expm(0.3 * rng.skew(6));
  Matrix mid = lie::geodesic_midpoint(p, q);
  const double dp = lie::distance(p, mid);
  const double dq = lie::distance(mid, q);
  CHECK(dp == doctest::Approx(dq).epsilon(1e-9));
  CHECK(dp + dq == doctest::Approx(lie::distance(p, q)).epsilon(1e-9));

  Matrix a = planar_skew(4, {0.9, 0.2});
  Matrix m2 = lie::geodesic_midpoint(Matrix::Identity(4, 4), lie::expm(a));
  CHECK((m2 - lie::expm(0.5 * a)).norm() <= 1e-10);
}

TEST_CASE("group geodesics hit the far pole at odd angles") {
  lie::GroupGeodesic geo{Matrix::Identity(4, 4), planar_skew(4, {1.0, 1.0})};
  CHECK((geo.at(0.0) - Matrix::Identity(4, 4)).norm() <= 1e-14);
  CHECK((geo.at(1.0) + Matrix::Identity(4, 4)).norm() <= 1e-12);
  CHECK((geo.at(0.5) - lie::expm(0.5 * kPi * geo.velocity)).norm() <= 1e-12);
}

TEST_CASE("complex frame pairs columns with their image") {
  Rng rng(17);
  Matrix q = lie::expm(rng.skew(8));
  Matrix jo = q * planar_skew(8, {1, 1, 1, 1}) * q.transpose();
  Matrix frame = lie::complex_frame(jo);
  CHECK(hopflab::orthogonality_residual(frame) <= 1e-12);
  for (int c = 0; c < 8; c += 2)
    CHECK((jo * frame.col(c) - frame.col(c + 1)).norm() <= 1e-10);
}

TEST_CASE("complexify views commuting matrices as complex") {
  Matrix jo = planar_skew(4, {1, 1});
  Matrix frame = lie::complex_frame(jo);
  Matrix m = planar_skew(4, {0.7, -0.2});
  auto c = lie::complexify(m, frame);
  CHECK(c.rows() == 2);
  CHECK(std::abs(c(0, 0) - std::complex<double>(0.0, 0.7)) <= 1e-12);
  CHECK(std::abs(c(1, 1) - std::complex<double>(0.0, -0.2)) <= 1e-12);

  Matrix bad = Matrix::Zero(4, 4);
  bad(0, 1) = 1.0;
  bad(1, 0) = 1.0;  // symmetric off-plane coupling does not commute with jo
  CHECK_THROWS_AS(lie::complexify(bad, frame), hopflab::InvalidInput);
}

TEST_CASE("det winding counts full turns") {
  Matrix jo = planar_skew(2, {1.0});
  for (int deg = -2; deg <= 3; ++deg) {
    std::vector<Matrix> loop;
    const int steps = 48;
    for (int i = 0; i < steps; ++i) loop.push_back(rot2(2.0 * kPi * deg * i / steps));
    CHECK(lie::det_winding(loop, jo) == deg);
  }
}

TEST_CASE("det winding is a refinement invariant and matches half the signed angles") {
  // geodesic loops t -> expm(pi t a) with even signed angles close up and
  // wind by half the angle sum
  Matrix jo = planar_skew(6, {1, 1, 1});
  Rng rng(21);
  const std::vector<std::vector<double>> angle_sets = {
      {2, 0, 0}, {2, 2, 0}, {4, -2, 2}, {-2, -2, -2}};
  for (const auto& set : angle_sets) {
    Matrix a0 = planar_skew(6, set);
    // conjugate by a jo-commuting rotation: winding must not change
    Matrix s = rng.skew(6);
    s = 0.5 * (s - jo * s * jo);
    Matrix q = lie::expm(s);
    Matrix a = q * a0 * q.transpose();
    const double half_sum = 0.5 * lie::signed_angle_sum(a, jo);
    for (int steps : {32, 64}) {
      std::vector<Matrix> loop;
      for (int i = 0; i < steps; ++i) loop.push_back(lie::expm((kPi * i / steps) * a));
      CHECK(lie::det_winding(loop, jo) == static_cast<int>(std::lround(half_sum)));
    }
  }
}

TEST_CASE("det winding refuses unresolved loops") {
  Matrix jo = planar_skew(2, {1.0});
  std::vector<Matrix> coarse;
  for (int i = 0; i < 2; ++i) coarse.push_back(rot2(2.0 * kPi * i / 2));
  CHECK_THROWS_AS(lie::det_winding(coarse, jo), hopflab::InvalidInput);
}

TEST_CASE("signed angle sum reads the trace pairing") {
  Matrix jo = planar_skew(6, {1, 1, 1});
  Matrix a = planar_skew(6, {3, -1, 2});
  CHECK(lie::signed_angle_sum(a, jo) == doctest::Approx(4.0).epsilon(1e-12));
}
