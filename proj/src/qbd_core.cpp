#include "tandem/qbd_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tandem {

double r_equation_residual(const QbdBlocks& b, const Eigen::MatrixXd& r) {
  return (b.q0 + r * b.q1 + r * r * b.q2).cwiseAbs().maxCoeff();
}

RSolution solve_R(const QbdBlocks& b, double tol) {
  RSolveOptions o;
  o.tol = tol;
  return solve_R(b, o);
}

RSolution solve_R(const QbdBlocks& b, const RSolveOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("solve_R needs tol > 0");
  const int n = b.phase_count;
  Eigen::FullPivLU<Eigen::MatrixXd> check(b.q1);
  if (!check.isInvertible()) throw SingularMatrix("q1 is singular");
  // R Q1 = -(Q0 + R^2 Q2)  <=>  Q1^T R^T = -(...)^T.
  Eigen::PartialPivLU<Eigen::MatrixXd> lut(b.q1.transpose());

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd checkpoint = r;
  RSolution out;
  const double blowup = 1e12 * n;
  for (long it = 1; it <= opts.max_iterations; ++it) {
    const Eigen::MatrixXd rhs = -(b.q0 + r * r * b.q2);
    const Eigen::MatrixXd next = lut.solve(rhs.transpose()).transpose();
    out.iterations = it;
    if (!next.allFinite() || next.sum() > blowup)
      throw InstabilityError("R iteration diverged");
    const double diff = (next - r).cwiseAbs().maxCoeff();
    r = next;
    if (it % 10 == 0) {
      const double slack = 1e-13 * (1.0 + r.cwiseAbs().maxCoeff());
      if (((r - checkpoint).array() < -slack).any())
        throw ConvergenceError("R iteration lost monotonicity");
      checkpoint = r;
    }
    if (diff < opts.tol) {
      const double res = r_equation_residual(b, r);
      if (res < opts.tol) {
        out.r = r;
        out.residual = res;
        out.spectral_radius = spectral_radius(r);
        return out;
      }
    }
  }
  throw ConvergenceError("R iteration cap exceeded");
}

Eigen::VectorXd StationaryDistribution::level_marginals() const {
  Eigen::VectorXd m(pi.size());
  for (std::size_t k = 0; k < pi.size(); ++k) m(k) = pi[k].sum();
  return m;
}

Eigen::RowVectorXd left_null_vector(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || n < 1) throw InvalidArgument("square matrix required");
  Eigen::RowVectorXd y(n);
  y(0) = 1.0;
  if (n > 1) {
    // y_rest * A[1:,1:] = -A[0,1:]
    const Eigen::MatrixXd sub = a.bottomRightCorner(n - 1, n - 1);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub.transpose());
    if (lu.rank() < n - 1)
      throw SingularMatrix("left null space is not one-dimensional");
    const Eigen::VectorXd rhs = -a.row(0).tail(n - 1).transpose();
    y.tail(n - 1) = lu.solve(rhs).transpose();
  }
  const double scale = a.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff();
  const double res = (y * a).cwiseAbs().maxCoeff();
  if (!(res <= 1e-8 * std::max(scale, 1.0)))
    throw SingularMatrix("fixing y(0) = 1 does not yield a null vector");
  return y;
}

StationaryDistribution stationary(const QbdBlocks& b, const RSolution& rs,
                                  int level_cap) {
  if (level_cap < 0) throw InvalidArgument("level_cap must be >= 0");
  if (!(rs.spectral_radius < 1.0))
    throw InstabilityError("sp(R) >= 1: no stationary distribution");
  const int n = b.phase_count;
  const Eigen::MatrixXd& r = rs.r;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::PartialPivLU<Eigen::MatrixXd> imr(eye - r);
  const Eigen::VectorXd nu = imr.solve(Eigen::VectorXd::Ones(n));

  const Eigen::RowVectorXd y0 = left_null_vector(b.q1_boundary + r * b.q2);
  const double norm = y0.dot(nu);
  if (!(norm > 0.0)) throw SingularMatrix("boundary vector normalization failed");

  StationaryDistribution d;
  d.level_cap = level_cap;
  d.pi.reserve(level_cap + 1);
  Eigen::RowVectorXd cur = y0 / norm;
  double mass = 0.0;
  for (int k = 0; k <= level_cap; ++k) {
    d.pi.push_back(cur.cwiseMax(0.0));
    mass += cur.sum();
    cur = cur * r;
  }
  d.tail_mass = cur.dot(nu);
  d.normalization_error = std::abs(1.0 - (mass + d.tail_mass));
  return d;
}

std::vector<std::complex<double>> eigen_spectrum(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("square matrix required");
  if (!a.allFinite()) throw InvalidArgument("matrix has non-finite entries");
  std::vector<std::complex<double>> ev;
  if (a.rows() == 0) return ev;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("eigensolver did not converge");
  const auto vals = es.eigenvalues();
  ev.assign(vals.data(), vals.data() + vals.size());
  std::stable_sort(ev.begin(), ev.end(), [](auto x, auto y) {
    if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return ev;
}

double perron_root(const Eigen::MatrixXd& a, double tol, long max_iterations) {
  if (a.rows() != a.cols()) throw InvalidArgument("square matrix required");
  if (a.rows() == 0) return 0.0;
  if (!a.allFinite()) throw InvalidArgument("matrix has non-finite entries");
  const double scale = a.cwiseAbs().maxCoeff();
  if (a.minCoeff() < -1e-12 * scale) throw InvalidArgument("matrix has negative entries");
  const Eigen::MatrixXd m = a.cwiseMax(0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(m.rows(), 1.0 / m.rows());
  double lambda = 0.0, step = 0.0;
  for (long it = 0; it < max_iterations; ++it) {
    const Eigen::RowVectorXd y = x * m;
    const double s = y.sum();
    if (!(s > 0.0)) return 0.0;  // nilpotent
    x = y / s;
    const double prev_step = step;
    step = std::abs(s - lambda);
    lambda = s;
    if (it < 3) continue;
    if (step <= 4.0 * eps * lambda) return lambda;
    // Error of a geometrically converging sequence, from the step ratio.
    const double q = step / prev_step;
    if (q < 1.0 && step * q / (1.0 - q) <= tol * lambda) return lambda;
  }
  throw ConvergenceError("power iteration did not converge");
}

double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.rows() > 0 && a.minCoeff() >= -1e-12 * a.cwiseAbs().maxCoeff())
    return perron_root(a);
  const auto ev = eigen_spectrum(a);
  return ev.empty() ? 0.0 : std::abs(ev.front());
}

double spectrum_distance(std::vector<std::complex<double>> a,
                         std::vector<std::complex<double>> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& x : a) {
    auto best = b.begin();
    for (auto it = b.begin(); it != b.end(); ++it)
      if (std::abs(*it - x) < std::abs(*best - x)) best = it;
    worst = std::max(worst, std::abs(*best - x));
    b.erase(best);
  }
  return worst;
}

}  // namespace tandem
