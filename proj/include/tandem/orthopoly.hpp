#pragma once

#include <cmath>
#include <vector>

#include "tandem/model.hpp"

namespace tandem {

enum class PolyKind { P, Phat };

struct PolyFamily {
  TandemParams params;
  double z = 0.5;
  PolyKind kind = PolyKind::P;
};

PolyFamily make_family(const TandemParams& p, double z, PolyKind kind);

// Value mantissa * 2^exponent, used where P_n over- or underflows a double.
struct ScaledValue {
  double mantissa = 0.0;
  long exponent = 0;

  double value() const { return std::ldexp(mantissa, static_cast<int>(exponent)); }
  int sign() const { return (mantissa > 0) - (mantissa < 0); }
  double log_abs() const;
};

// Three-term recursion in any real type.  The double overloads below use it
// with renormalization; extended-precision callers use it directly.
template <class Real>
Real eval_poly_as(const PolyFamily& f, int n, const Real& x) {
  const Real z = f.z, lam = f.params.lambda, mu1 = f.params.mu1,
             mu2 = f.params.mu2;
  const Real c = z / mu1;
  const Real shift = x + lam + mu1 + mu2 * (Real(1) - z);
  if (n == 0) return Real(1);
  Real prev = Real(1);
  Real cur;
  int k = 1;
  if (f.kind == PolyKind::P) {
    cur = c * (x + lam + mu2 * (Real(1) - z));
  } else {
    cur = c * (x + mu2 * (Real(1) - z));
    if (n == 1) return cur;
    Real next = c * (shift * cur - lam * (Real(1) - z));
    prev = cur;
    cur = next;
    k = 2;
  }
  for (; k < n; ++k) {
    Real next = c * (shift * cur - lam * prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

double eval_poly(const PolyFamily& f, int n, double x);
ScaledValue eval_poly_scaled(const PolyFamily& f, int n, double x);
// Values for degrees 0..n_max, all sharing the overflow-safe representation.
std::vector<ScaledValue> eval_sequence(const PolyFamily& f, int n_max, double x);

struct ZeroSet {
  int n = 0;
  std::vector<double> zeros;  // increasing
};

// Zeros as eigenvalues of the symmetrized tridiagonal characteristic matrix.
ZeroSet zeros(const PolyFamily& f, int n);
// i-th smallest zero, 1-based.
double zero_at(const PolyFamily& f, int n, int i);
double largest_zero(const PolyFamily& f, int n);

// Number of zeros of degree n strictly below x (Sturm count).
int count_zeros_below(const PolyFamily& f, int n, double x);

// Root in (0,1) of the largest zero of Phat_{m+1}(.; z), i.e. sp(R_m).
// tol <= 0 bisects to full precision.
double compute_zhat(const TandemParams& p, int m, double tol = 0.0);

struct ZhatStudy {
  std::vector<int> m;
  std::vector<double> zhat;
  std::vector<double> gap;  // |zhat - limit|
  double limit = 0.0;       // eta or rho2 by regime
  bool strictly_increasing = false;
  bool gap_strictly_decreasing = false;
};

ZhatStudy zhat_limit_study(const TandemParams& p, int m_max, double tol = 0.0);

}  // namespace tandem
