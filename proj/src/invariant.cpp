#include "tandem/invariant.hpp"

#include <cmath>
#include <limits>

namespace tandem {

const char* to_string(MeasureRegime r) {
  switch (r) {
    case MeasureRegime::RealRoots: return "RealRoots";
    case MeasureRegime::Degenerate: return "Degenerate";
    case MeasureRegime::Oscillating: return "Oscillating";
  }
  return "?";
}

namespace {

// b in mu1 u^2 - b u + lambda z = 0.
double linear_coeff(const TandemParams& p, double z) {
  return (p.lambda + p.mu1 + p.mu2 * (1.0 - z)) * z;
}

double first_term(const TandemParams& p, double z) {
  return (p.lambda + p.mu2 * (1.0 - z)) * z / p.mu1;
}

double signed_pow(double u, int k) {
  const double m = std::pow(std::abs(u), k);
  return (u < 0 && (k & 1)) ? -m : m;
}

}  // namespace

double w_discriminant(const TandemParams& p, double z) {
  const double b = linear_coeff(p, z);
  return b * b - 4.0 * p.lambda * p.mu1 * z;
}

std::vector<double> w_recursion_oracle(const TandemParams& p, double z, int n) {
  validate_rates(p);
  if (z == 0.0) throw InvalidArgument("z must be nonzero");
  if (n < 1) throw InvalidArgument("n must be >= 1");
  std::vector<double> w(n);
  w[0] = 1.0;
  if (n == 1) return w;
  w[1] = first_term(p, z);
  const double b = linear_coeff(p, z);
  for (int k = 1; k + 1 < n; ++k)
    w[k + 1] = (b * w[k] - p.lambda * z * w[k - 1]) / p.mu1;
  return w;
}

Classification classify(const TandemParams& p, double z) {
  validate_rates(p);
  Classification c;
  c.in_ell1 = compute_z1(p) < z && z < p.mu1 / p.mu2;
  // chi1 vanishes at eta exactly; allow its rounding so classify agrees
  // with the degenerate branch of solve_w there.
  const double slack = z > 0.0 ? 64.0 * std::numeric_limits<double>::epsilon() *
                                     (p.lambda + p.mu1 + p.mu2 + 2.0 * std::sqrt(p.lambda * p.mu1 / z))
                               : 0.0;
  c.positive = z > 0.0 && chi1(p, z) <= slack;
  c.feasible = c.in_ell1 && c.positive;
  return c;
}

InvariantMeasure solve_w(const TandemParams& p, double z, int n_terms) {
  validate_rates(p);
  if (z == 0.0) throw InvalidArgument("z = 0 is the structural eigenvector, not an invariant measure");
  if (!(z > -1.0 && z < 1.0)) throw InvalidArgument("z must lie in (-1, 1)");
  if (n_terms < 2) throw InvalidArgument("n_terms must be >= 2");

  InvariantMeasure w;
  w.z_ = z;
  const Classification cl = classify(p, z);
  w.in_ell1_ = cl.in_ell1;
  w.positive_ = cl.positive;

  const double b = linear_coeff(p, z);
  const double delta = b * b - 4.0 * p.lambda * p.mu1 * z;
  // A = mu1 (2 w_1 - b / mu1); c1 = (A + sqrt D)/(2 sqrt D).
  const double a = z * (p.lambda - p.mu1 + p.mu2 * (1.0 - z));
  const double eps = std::numeric_limits<double>::epsilon();

  if (std::abs(delta) <= 64.0 * eps * b * b) {
    w.regime_ = MeasureRegime::Degenerate;
    const double u = std::sqrt(p.rho1() * z);
    w.coeffs_ = DegenerateCoefficients{u, 1.0 - std::sqrt(z / p.rho1())};
  } else if (delta > 0.0) {
    w.regime_ = MeasureRegime::RealRoots;
    const double sq = std::sqrt(delta);
    // A^2 - delta in factored form, so c1 and c2 keep relative accuracy
    // when one of them is close to zero (z near rho2).
    const double gap = 4.0 * p.mu1 * z * (1.0 - z) * std::fma(p.mu2, z, -p.lambda);
    const double plus = a >= 0.0 ? a + sq : gap / (sq - a);
    const double minus = a <= 0.0 ? sq - a : gap / (sq + a);
    double u1, u2;
    if (b > 0.0) {
      u1 = (b + sq) / (2.0 * p.mu1);
      u2 = p.lambda * z / (p.mu1 * u1);
    } else {
      u2 = (b - sq) / (2.0 * p.mu1);
      u1 = p.lambda * z / (p.mu1 * u2);
    }
    w.coeffs_ = RealRootsCoefficients{plus / (2.0 * sq), minus / (2.0 * sq), u1, u2};
    // With c1, c2 of opposite sign the two-root sum cancels badly as the
    // roots merge; the hyperbolic form keeps the cancellation explicit.
    if (z > 0.0 && std::abs(a) > sq) {
      w.hyperbolic_ = true;
      w.rho_ = std::sqrt(p.rho1() * z);
      w.theta_ = std::atanh(sq / b);
      w.hc_ = a / sq;
    }
  } else {
    w.regime_ = MeasureRegime::Oscillating;
    const double sq = std::sqrt(-delta);
    w.coeffs_ = OscillatingCoefficients{std::sqrt(p.rho1() * z), std::atan2(sq, b), a / sq};
  }
  w.prefix_ = w.materialize(n_terms);
  return w;
}

double InvariantMeasure::at(int k) const {
  if (k < 0) throw InvalidArgument("negative index");
  if (k < static_cast<int>(prefix_.size())) return prefix_[k];
  return closed_form(k);
}

double InvariantMeasure::closed_form(int k) const {
  if (k == 0) return 1.0;
  switch (regime_) {
    case MeasureRegime::Degenerate: {
      const auto& c = std::get<DegenerateCoefficients>(coeffs_);
      return std::pow(c.u, k) * (1.0 + c.c * k);
    }
    case MeasureRegime::Oscillating: {
      const auto& c = std::get<OscillatingCoefficients>(coeffs_);
      return std::pow(c.modulus, k) * (std::cos(k * c.phi) + c.c * std::sin(k * c.phi));
    }
    case MeasureRegime::RealRoots: break;
  }
  const auto& c = std::get<RealRootsCoefficients>(coeffs_);
  if (hyperbolic_) {
    const double kt = k * theta_;
    if (kt <= 20.0)
      return std::pow(rho_, k) * (std::cosh(kt) + hc_ * std::sinh(kt));
    const double lr = k * std::log(rho_);
    return c.c1 * std::exp(lr + kt) + c.c2 * std::exp(lr - kt);
  }
  return c.c1 * signed_pow(c.u1, k) + c.c2 * signed_pow(c.u2, k);
}

double InvariantMeasure::envelope(int k) const {
  switch (regime_) {
    case MeasureRegime::Degenerate: {
      const auto& c = std::get<DegenerateCoefficients>(coeffs_);
      return std::pow(c.u, k) * (1.0 + std::abs(c.c) * k);
    }
    case MeasureRegime::Oscillating: {
      const auto& c = std::get<OscillatingCoefficients>(coeffs_);
      return std::pow(c.modulus, k) * std::sqrt(1.0 + c.c * c.c);
    }
    case MeasureRegime::RealRoots: break;
  }
  const auto& c = std::get<RealRootsCoefficients>(coeffs_);
  if (hyperbolic_) {
    const double kt = k * theta_;
    if (kt <= 20.0)
      return std::pow(rho_, k) * (std::cosh(kt) + std::abs(hc_) * std::sinh(kt));
  }
  return std::abs(c.c1) * std::pow(std::abs(c.u1), k) +
         std::abs(c.c2) * std::pow(std::abs(c.u2), k);
}

double InvariantMeasure::tail_ratio() const {
  switch (regime_) {
    case MeasureRegime::Degenerate:
      return std::get<DegenerateCoefficients>(coeffs_).u;
    case MeasureRegime::Oscillating:
      return std::get<OscillatingCoefficients>(coeffs_).modulus;
    case MeasureRegime::RealRoots: break;
  }
  const auto& c = std::get<RealRootsCoefficients>(coeffs_);
  return std::max(std::abs(c.u1), std::abs(c.u2));
}

std::vector<double> InvariantMeasure::materialize(int n) const {
  std::vector<double> out(std::max(n, 0));
  for (int k = 0; k < n; ++k) out[k] = closed_form(k);
  return out;
}

}  // namespace tandem
