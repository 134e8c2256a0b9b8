#pragma once

#include <variant>
#include <vector>

#include "tandem/model.hpp"

namespace tandem {

enum class MeasureRegime { RealRoots, Degenerate, Oscillating };
const char* to_string(MeasureRegime r);

// w_k = c1 u1^k + c2 u2^k
struct RealRootsCoefficients {
  double c1, c2, u1, u2;
};
// w_k = u^k (1 + c k)
struct DegenerateCoefficients {
  double u, c;
};
// w_k = |u|^k (cos k phi + c sin k phi)
struct OscillatingCoefficients {
  double modulus, phi, c;
};

using MeasureCoefficients =
    std::variant<RealRootsCoefficients, DegenerateCoefficients, OscillatingCoefficients>;

struct Classification {
  bool in_ell1 = false;
  bool positive = false;
  bool feasible = false;
};

// z^{-1}-invariant measure of the infinite-phase R, normalized to w_0 = 1.
class InvariantMeasure {
 public:
  double z() const { return z_; }
  MeasureRegime regime() const { return regime_; }
  const MeasureCoefficients& coefficients() const { return coeffs_; }
  bool in_ell1() const { return in_ell1_; }
  bool positive() const { return positive_; }

  double at(int k) const;
  // Magnitude scale of w_k with cancellation between the modes removed.
  double envelope(int k) const;
  // Geometric rate of the tail, max |u_i|.
  double tail_ratio() const;
  const std::vector<double>& prefix() const { return prefix_; }
  // Evaluates w_0..w_{n-1}.
  std::vector<double> materialize(int n) const;

 private:
  double closed_form(int k) const;
  friend InvariantMeasure solve_w(const TandemParams& p, double z, int n_terms);
  double z_ = 0.0;
  MeasureRegime regime_ = MeasureRegime::RealRoots;
  MeasureCoefficients coeffs_{};
  bool in_ell1_ = false;
  bool positive_ = false;
  // Hyperbolic form of the real-root case for z > 0:
  // w_k = rho^k (cosh k theta + hc sinh k theta).
  bool hyperbolic_ = false;
  double rho_ = 0.0, theta_ = 0.0, hc_ = 0.0;
  std::vector<double> prefix_;
};

InvariantMeasure solve_w(const TandemParams& p, double z, int n_terms);

// Forward recursion from w_0 = 1; independent of the closed forms.
std::vector<double> w_recursion_oracle(const TandemParams& p, double z, int n);

Classification classify(const TandemParams& p, double z);

// Discriminant of the characteristic quadratic mu1 u^2 - b u + lambda z.
double w_discriminant(const TandemParams& p, double z);

}  // namespace tandem
