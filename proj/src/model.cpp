#include "tandem/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tandem {

Capacity Capacity::finite(int m) {
  if (m < 1) throw InvalidArgument("finite capacity must be at least 1");
  return Capacity(CapacityKind::Finite, m);
}

int Capacity::value() const {
  if (!is_finite()) throw InvalidArgument("capacity is infinite");
  return m_;
}

std::string Capacity::to_string() const {
  return is_finite() ? std::to_string(m_) : std::string("inf");
}

void validate_rates(const TandemParams& p) {
  for (double r : {p.lambda, p.mu1, p.mu2}) {
    if (!std::isfinite(r) || r <= 0.0)
      throw InvalidArgument("rates must be finite and strictly positive");
  }
}

TandemParams make_params(double lambda, double mu1, double mu2,
                         Capacity capacity) {
  TandemParams p{lambda, mu1, mu2, capacity};
  validate_rates(p);
  return p;
}

Regime regime_of(const TandemParams& p) {
  return p.mu1 <= p.mu2 ? Regime::FirstBottleneck : Regime::SecondBottleneck;
}

const char* to_string(Regime r) {
  return r == Regime::FirstBottleneck ? "FirstBottleneck" : "SecondBottleneck";
}

QbdBlocks build_blocks(const TandemParams& p, int phase_cap) {
  validate_rates(p);
  if (phase_cap < 1) throw InvalidArgument("phase_cap must be at least 1");
  QbdBlocks b;
  if (p.capacity.is_finite()) {
    if (phase_cap != p.capacity.value())
      throw InvalidArgument("phase_cap must equal the finite capacity m");
  } else {
    b.truncation_note = "infinite waiting room truncated to a surrogate with " +
                        std::to_string(phase_cap) + " places";
  }
  const int n = phase_cap + 1;
  b.phase_count = n;
  b.q0 = Eigen::MatrixXd::Zero(n, n);
  b.q1 = Eigen::MatrixXd::Zero(n, n);
  b.q2 = p.mu2 * Eigen::MatrixXd::Identity(n, n);
  b.q1_boundary = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double arr = i < n - 1 ? p.lambda : 0.0;
    const double srv = i > 0 ? p.mu1 : 0.0;
    if (i > 0) b.q0(i, i - 1) = p.mu1;
    if (i < n - 1) {
      b.q1(i, i + 1) = p.lambda;
      b.q1_boundary(i, i + 1) = p.lambda;
    }
    b.q1(i, i) = -(arr + srv + p.mu2);
    b.q1_boundary(i, i) = -(arr + srv);
  }
  return b;
}

double conservation_defect(const QbdBlocks& b) {
  const Eigen::VectorXd inner = (b.q0 + b.q1 + b.q2).rowwise().sum();
  const Eigen::VectorXd bound = (b.q1_boundary + b.q0).rowwise().sum();
  return std::max(inner.cwiseAbs().maxCoeff(), bound.cwiseAbs().maxCoeff());
}

void check_generator_structure(const QbdBlocks& b, double tol) {
  const int n = b.phase_count;
  auto square = [n](const Eigen::MatrixXd& m) {
    return m.rows() == n && m.cols() == n;
  };
  if (n < 1 || !square(b.q0) || !square(b.q1) || !square(b.q2) ||
      !square(b.q1_boundary))
    throw InvalidArgument("blocks must be square with phase_count rows");
  if ((b.q0.array() < 0).any() || (b.q2.array() < 0).any())
    throw InvalidArgument("q0 and q2 must be nonnegative");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (b.q1(i, j) < 0 || b.q1_boundary(i, j) < 0)
        throw InvalidArgument("off-diagonal rates must be nonnegative");
    }
    if (b.q1(i, i) >= 0 || b.q1_boundary(i, i) > 0)
      throw InvalidArgument("diagonal rates must be negative");
  }
  const double scale = std::max(1.0, b.q1.cwiseAbs().maxCoeff());
  if (conservation_defect(b) > tol * scale)
    throw InvalidArgument("generator rows do not sum to zero");
}

std::string StabilityReport::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (rule) {
    case StabilityRule::FiniteRhoNotOne:
      os << "finite capacity, rho1 != 1: rho2 = " << lhs
         << " vs (1 - rho1^(m+1))/(1 - rho1^m) = " << rhs;
      break;
    case StabilityRule::FiniteRhoOne:
      os << "finite capacity, rho1 = 1: rho2 = " << lhs << " vs 1 + 1/m = " << rhs;
      break;
    case StabilityRule::InfiniteCapacity:
      os << "infinite capacity: lambda = " << lhs << " vs min(mu1, mu2) = " << rhs;
      break;
  }
  os << (stable ? " (stable)" : " (unstable)");
  return os.str();
}

StabilityReport stability_check(const TandemParams& p) {
  validate_rates(p);
  StabilityReport r;
  if (!p.capacity.is_finite()) {
    r.rule = StabilityRule::InfiniteCapacity;
    r.lhs = p.lambda;
    r.rhs = std::min(p.mu1, p.mu2);
  } else {
    const int m = p.capacity.value();
    const double rho1 = p.rho1();
    r.lhs = p.rho2();
    if (std::abs(rho1 - 1.0) < 1e-12) {
      r.rule = StabilityRule::FiniteRhoOne;
      r.rhs = 1.0 + 1.0 / m;
    } else {
      r.rule = StabilityRule::FiniteRhoNotOne;
      r.rhs = (1.0 - std::pow(rho1, m + 1)) / (1.0 - std::pow(rho1, m));
    }
  }
  r.stable = r.lhs < r.rhs;
  return r;
}

Eigen::MatrixXd characteristic_matrix(const TandemParams& p, double z, int n,
                                      CharVariant variant) {
  validate_rates(p);
  if (n < 1) throw InvalidArgument("characteristic matrix needs n >= 1");
  if (z == 0.0 || !std::isfinite(z))
    throw InvalidArgument("characteristic matrix needs z != 0");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  const double base = -p.lambda - p.mu2 * (1.0 - z);
  for (int i = 0; i < n; ++i) {
    q(i, i) = base - (i > 0 ? p.mu1 : 0.0);
    if (i + 1 < n) q(i, i + 1) = p.lambda;
    if (i > 0) q(i, i - 1) = p.mu1 / z;
  }
  if (variant == CharVariant::Capped) q(n - 1, n - 1) += p.lambda;
  return q;
}

namespace {
void require_positive_z(double z) {
  if (!(z > 0.0) || !std::isfinite(z))
    throw InvalidArgument("z must be strictly positive");
}
}  // namespace

double tau(const TandemParams& p, double z) {
  require_positive_z(z);
  return -p.lambda - p.mu1 - p.mu2 * (1.0 - z) +
         2.0 * std::sqrt(p.lambda * p.mu1 / z);
}

double sigma(const TandemParams& p, double z) {
  require_positive_z(z);
  return -p.lambda - p.mu1 - p.mu2 * (1.0 - z) -
         2.0 * std::sqrt(p.lambda * p.mu1 / z);
}

double chi(const TandemParams& p, double z) {
  require_positive_z(z);
  return (p.lambda / z - p.mu2) * (1.0 - z);
}

double chi1(const TandemParams& p, double z) {
  return z <= p.rho1() ? tau(p, z) : chi(p, z);
}

double chi1_max_disagreement(const TandemParams& p, double z) {
  return std::abs(chi1(p, z) - std::max(tau(p, z), chi(p, z)));
}

double compute_eta(const TandemParams& p, double tol) {
  validate_rates(p);
  double lo = 1e-12;
  double hi = 1.0 - 1e-12;
  if (!(tau(p, lo) > 0.0))
    throw ConvergenceError("tau is not positive at the left bracket end");
  if (!(tau(p, hi) < 0.0))
    throw ConvergenceError("tau has no sign change below 1 (eta = 1 boundary)");
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (tol > 0.0 && hi - lo < tol) break;
    (tau(p, mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double compute_z1(const TandemParams& p) {
  validate_rates(p);
  // Negative root of mu2 z^2 - s z - mu1, written without cancellation.
  const double s = 2.0 * p.lambda + p.mu1 + p.mu2;
  return -2.0 * p.mu1 / (s + std::sqrt(s * s + 4.0 * p.mu1 * p.mu2));
}

SpectralReport spectral_report(const TandemParams& p, double tol) {
  validate_rates(p);
  SpectralReport r;
  r.stability = stability_check(p);
  if (!r.stability.stable)
    throw InstabilityError("unstable parameters: " + r.stability.describe());
  // The feasible interval describes the infinite waiting room, which needs
  // lambda < min(mu1, mu2) whatever the configured capacity.
  if (!(p.lambda < std::min(p.mu1, p.mu2)))
    throw InstabilityError(
        "spectral report requires lambda < min(mu1, mu2) for the infinite "
        "waiting room");
  r.rho1 = p.rho1();
  r.rho2 = p.rho2();
  r.eta = compute_eta(p, tol);
  r.z1 = compute_z1(p);
  r.regime = regime_of(p);
  if (r.regime == Regime::FirstBottleneck)
    r.feasible_decay_interval = {r.eta, p.mu1 / p.mu2};
  else
    r.feasible_decay_interval = {r.rho2, 1.0};
  return r;
}

}  // namespace tandem
