#include "hopflab/liegroup.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace hopflab::liegroup {

namespace {

void check_square(const Matrix& m, const char* who) {
  require(m.rows() == m.cols() && m.rows() > 0, std::string(who) + ": square matrix required");
}

void check_skew(const Matrix& a, const char* who) {
  check_square(a, who);
  const double scale = std::max(1.0, a.norm());
  require((a + a.transpose()).norm() <= 1e-8 * scale, std::string(who) + ": skew matrix required");
}

void check_rotation(const Matrix& r, const char* who) {
  check_square(r, who);
  const double resid = orthogonality_residual(r);
  require(resid <= 1e-6, std::string(who) + ": orthogonal matrix required (residual " +
                             std::to_string(resid) + ")");
  require(r.determinant() > 0.0, std::string(who) + ": determinant must be +1");
}

double wrap_to_pi(double x) {
  while (x > kPi) x -= 2.0 * kPi;
  while (x <= -kPi) x += 2.0 * kPi;
  return x;
}

struct LogOptions {
  bool complete_branch = false;  // pi-rotations across the -1 eigenspace
  bool* completed = nullptr;
};

Matrix log_rotation(const Matrix& r, const LogOptions& opt) {
  check_rotation(r, "logm");
  const int n = static_cast<int>(r.rows());
  const Matrix sym = 0.5 * (r + r.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  require(es.info() == Eigen::Success, "logm: eigensolver failed");
  const Vector c = es.eigenvalues();  // ascending in [-1, 1]
  const Matrix& u = es.eigenvectors();

  // conjugate cos-pairs split by about the input's orthogonality drift, so the
  // cluster gap must sit above it or a lone half of a pair fakes an angle of pi
  const double drift = (r.transpose() * r - Matrix::Identity(n, n)).norm();
  const double gap = std::max(1e-11, 64.0 * drift);

  if (opt.completed) *opt.completed = false;
  Matrix out = Matrix::Zero(n, n);
  int lo = 0;
  while (lo < n) {
    int hi = lo + 1;
    while (hi < n && c(hi) - c(hi - 1) <= gap) ++hi;
    const int d = hi - lo;
    double cbar = 0.0;
    for (int i = lo; i < hi; ++i) cbar += std::clamp(c(i), -1.0, 1.0);
    cbar /= d;

    const Matrix block = u.middleCols(lo, d);
    const Matrix rhat = block.transpose() * r * block;
    const Matrix shat = 0.5 * (rhat - rhat.transpose());
    // recover the angle through the skew part: well conditioned at both ends
    const double sbar = shat.norm() / std::sqrt(static_cast<double>(d));
    const double theta = std::atan2(sbar, cbar);

    if (theta >= kPi - 1e-6) {
      // rotation angle at pi: the principal branch is ambiguous here
      if (!opt.complete_branch)
        throw BranchError("logm: rotation angle at pi (principal branch undefined)");
      if (d % 2 != 0) throw BranchError("logm: odd-dimensional angle-pi eigenspace");
      for (int i = lo; i < hi; i += 2) {
        const Vector v1 = u.col(i);
        const Vector v2 = u.col(i + 1);
        out += kPi * (v1 * v2.transpose() - v2 * v1.transpose());
      }
      if (opt.completed) *opt.completed = true;
    } else {
      // shat = sin(theta) * (complex structure), so scale by theta / sin(theta)
      const double factor = sbar > 1e-8 ? theta / sbar : 1.0 + sbar * sbar / 6.0;
      out += block * (factor * shat) * block.transpose();
    }
    lo = hi;
  }
  return 0.5 * (out - out.transpose());
}

}  // namespace

Matrix SkewSpectral::reconstruct() const {
  const int n = static_cast<int>(frame.rows());
  Matrix d = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < angles.size(); ++j) {
    const int i = static_cast<int>(2 * j);
    d(i, i + 1) = -angles[j];
    d(i + 1, i) = angles[j];
  }
  return frame * d * frame.transpose();
}

SkewSpectral skew_spectral(const Matrix& a, double tol) {
  check_skew(a, "skew_spectral");
  const int n = static_cast<int>(a.rows());
  const Matrix s = a.transpose() * a;  // == -a^2, symmetric psd
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  require(es.info() == Eigen::Success, "skew_spectral: eigensolver failed");
  const Vector lam = es.eigenvalues();
  const Matrix& u = es.eigenvectors();

  const double lmax = std::max(0.0, lam(n - 1));
  const double sigma = std::sqrt(lmax);
  const double athresh = std::max({tol * 0.0, 1e-12, 1e-7 * sigma});
  const double lthresh = athresh * athresh;
  const double lgap = std::max(1e-9 * std::max(1.0, lmax), 1e-13);

  struct Plane {
    Vector u, w;
    double angle;
  };
  std::vector<Plane> planes;
  std::vector<Vector> kernel;

  // orthogonalize across cluster boundaries too: when the gap heuristic splits
  // a nearly degenerate eigenvalue pair, the partner column a v of one cluster
  // lands in the other, and a per-cluster state would pick it twice
  std::vector<Vector> chosen;
  auto residual = [&chosen](const Vector& v) {
    Vector r = v;
    for (const Vector& cvec : chosen) r -= cvec.dot(r) * cvec;
    return r;
  };

  int hi = n;
  while (hi > 0) {
    int lo = hi - 1;
    while (lo > 0 && lam(lo) - lam(lo - 1) <= lgap) --lo;
    if (lam(hi - 1) <= lthresh) {
      for (int i = 0; i < hi; ++i) {
        Vector r = residual(u.col(i));
        const double nr = r.norm();
        if (nr <= 0.5) continue;  // consumed as an earlier partner column
        r /= nr;
        kernel.push_back(r);
        chosen.push_back(std::move(r));
      }
      break;
    }
    // greedy plane pairing inside one eigenvalue cluster of -a^2
    const int d = hi - lo;
    for (int step = 0; step < d; ++step) {
      int best = -1;
      double best_norm = 0.5;  // consumed columns project to ~0
      Vector best_res;
      for (int i = lo; i < hi; ++i) {
        Vector r = residual(u.col(i));
        const double nr = r.norm();
        if (nr > best_norm) {
          best_norm = nr;
          best = i;
          best_res = std::move(r);
        }
      }
      if (best < 0) break;
      Vector v = best_res / best_norm;
      Vector wraw = a * v;
      const double angle = wraw.norm();
      if (angle <= athresh) {
        kernel.push_back(v);
        chosen.push_back(v);
        continue;
      }
      Vector w = residual(wraw / angle);
      require(w.norm() > 0.5, "skew_spectral: degenerate plane pairing");
      w.normalize();
      planes.push_back({v, w, angle});
      chosen.push_back(v);
      chosen.push_back(w);
    }
    hi = lo;
  }

  std::stable_sort(planes.begin(), planes.end(),
                   [](const Plane& x, const Plane& y) { return x.angle > y.angle; });

  SkewSpectral out;
  out.frame.resize(n, n);
  int col = 0;
  for (const Plane& p : planes) {
    out.frame.col(col++) = p.u;
    out.frame.col(col++) = p.w;
    out.angles.push_back(p.angle);
  }
  for (const Vector& v : kernel) out.frame.col(col++) = v;
  require(col == n, "skew_spectral: frame assembly failed");
  out.kernel_dim = static_cast<int>(kernel.size());
  return out;
}

Matrix expm(const Matrix& a) {
  const SkewSpectral sp = skew_spectral(a);
  const int n = static_cast<int>(a.rows());
  Matrix d = Matrix::Identity(n, n);
  for (std::size_t j = 0; j < sp.angles.size(); ++j) {
    const int i = static_cast<int>(2 * j);
    const double ca = std::cos(sp.angles[j]);
    const double sa = std::sin(sp.angles[j]);
    d(i, i) = ca;
    d(i, i + 1) = -sa;
    d(i + 1, i) = sa;
    d(i + 1, i + 1) = ca;
  }
  return sp.frame * d * sp.frame.transpose();
}

Matrix logm(const Matrix& r, double tol) {
  (void)tol;
  return log_rotation(r, {});
}

Matrix logm_completed(const Matrix& r, bool* completed, double tol) {
  (void)tol;
  LogOptions opt;
  opt.complete_branch = true;
  opt.completed = completed;
  return log_rotation(r, opt);
}

double distance(const Matrix& p, const Matrix& q) {
  require(p.rows() == q.rows() && p.cols() == q.cols(), "distance: size mismatch");
  return logm(p.transpose() * q).norm();
}

Matrix geodesic_midpoint(const Matrix& p, const Matrix& q) {
  require(p.rows() == q.rows() && p.cols() == q.cols(), "geodesic_midpoint: size mismatch");
  const Matrix m = p * expm(0.5 * logm(p.transpose() * q));
  // one newton-schulz step keeps round-off from compounding across sweeps
  return 0.5 * m * (3.0 * Matrix::Identity(m.rows(), m.cols()) - m.transpose() * m);
}

Matrix GroupGeodesic::at(double t) const { return base * expm((kPi * t) * velocity); }

Matrix complex_frame(const Matrix& jo, double tol) {
  check_square(jo, "complex_frame");
  const int n = static_cast<int>(jo.rows());
  require(n % 2 == 0, "complex_frame: even dimension required");
  require(orthogonality_residual(jo) <= std::max(tol, 1e-8), "complex_frame: orthogonal structure required");
  require((jo * jo + Matrix::Identity(n, n)).norm() <= std::max(tol, 1e-8),
          "complex_frame: square must be -identity");

  Matrix frame(n, n);
  int col = 0;
  for (int i = 0; i < n && col < n; ++i) {
    Vector v = Vector::Zero(n);
    v(i) = 1.0;
    for (int c = 0; c < col; ++c) v -= frame.col(c).dot(v) * frame.col(c);
    const double nv = v.norm();
    if (nv < 0.5) continue;
    v /= nv;
    Vector w = jo * v;
    for (int c = 0; c < col; ++c) w -= frame.col(c).dot(w) * frame.col(c);
    w -= v.dot(w) * v;
    require(w.norm() > 0.5, "complex_frame: pairing failed");
    w.normalize();
    frame.col(col++) = v;
    frame.col(col++) = w;
  }
  require(col == n, "complex_frame: frame assembly failed");
  return frame;
}

Eigen::MatrixXcd complexify(const Matrix& m, const Matrix& frame, double tol) {
  require(m.rows() == frame.rows() && m.cols() == frame.rows(), "complexify: size mismatch");
  const int half = static_cast<int>(m.rows()) / 2;
  const Matrix b = frame.transpose() * m * frame;
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  Eigen::MatrixXcd c(half, half);
  for (int p = 0; p < half; ++p)
    for (int q = 0; q < half; ++q) {
      const double re = b(2 * p, 2 * q);
      const double im = b(2 * p + 1, 2 * q);
      require(std::abs(b(2 * p + 1, 2 * q + 1) - re) <= tol * scale &&
                  std::abs(b(2 * p, 2 * q + 1) + im) <= tol * scale,
              "complexify: matrix does not commute with the complex structure");
      c(p, q) = std::complex<double>(re, im);
    }
  return c;
}

int det_winding(const std::vector<Matrix>& loop, const Matrix& jo, double tol) {
  require(loop.size() >= 2, "det_winding: at least two samples required");
  const Matrix frame = complex_frame(jo);
  std::vector<double> args;
  args.reserve(loop.size());
  for (const Matrix& m : loop) {
    check_rotation(m, "det_winding");
    const Eigen::MatrixXcd c = complexify(m, frame, tol);
    const std::complex<double> det = Eigen::PartialPivLU<Eigen::MatrixXcd>(c).determinant();
    require(std::abs(std::abs(det) - 1.0) <= 1e-6, "det_winding: determinant off the unit circle");
    args.push_back(std::arg(det));
  }
  // the loop closes from the last sample back to the first
  double total = 0.0;
  const std::size_t count = loop.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double step = wrap_to_pi(args[(i + 1) % count] - args[i]);
    require(std::abs(step) < kPi * (1.0 - 1e-9),
            "det_winding: phase step at pi; refine the loop");
    total += step;
  }
  const double w = total / (2.0 * kPi);
  const double rounded = std::round(w);
  require(std::abs(w - rounded) <= 1e-6, "det_winding: winding is not an integer; loop not closed");
  return static_cast<int>(rounded);
}

double signed_angle_sum(const Matrix& a, const Matrix& jo) {
  check_skew(a, "signed_angle_sum");
  require(a.rows() == jo.rows(), "signed_angle_sum: size mismatch");
  return 0.5 * (jo.transpose() * a).trace();
}

}  // namespace hopflab::liegroup
