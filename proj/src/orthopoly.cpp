#include "tandem/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tandem {

double ScaledValue::log_abs() const {
  if (mantissa == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(mantissa)) + static_cast<double>(exponent) * std::log(2.0);
}

PolyFamily make_family(const TandemParams& p, double z, PolyKind kind) {
  validate_rates(p);
  if (!(z > 0.0) || !std::isfinite(z))
    throw InvalidArgument("polynomial family needs z > 0");
  return PolyFamily{p, z, kind};
}

namespace {

constexpr int kRescaleBits = 600;

// Renormalize the pair so the larger magnitude sits near 1.
void rescale(double& prev, double& cur, long& exponent) {
  const double big = std::max(std::abs(prev), std::abs(cur));
  if (big == 0.0) return;
  int e = 0;
  std::frexp(big, &e);
  if (std::abs(e) < kRescaleBits) return;
  prev = std::ldexp(prev, -e);
  cur = std::ldexp(cur, -e);
  exponent += e;
}

struct Recurrence {
  double c, shift_no_x, lam, mu2_1mz;
  explicit Recurrence(const PolyFamily& f)
      : c(f.z / f.params.mu1),
        shift_no_x(f.params.lambda + f.params.mu1 + f.params.mu2 * (1.0 - f.z)),
        lam(f.params.lambda),
        mu2_1mz(f.params.mu2 * (1.0 - f.z)) {}
};

}  // namespace

std::vector<ScaledValue> eval_sequence(const PolyFamily& f, int n_max, double x) {
  if (n_max < 0) throw InvalidArgument("degree must be >= 0");
  const Recurrence rc(f);
  const double shift = x + rc.shift_no_x;
  std::vector<ScaledValue> out;
  out.reserve(n_max + 1);
  long exponent = 0;
  double prev = 1.0;
  out.push_back({1.0, 0});
  if (n_max == 0) return out;
  double cur = f.kind == PolyKind::P ? rc.c * (x + rc.lam + rc.mu2_1mz)
                                     : rc.c * (x + rc.mu2_1mz);
  out.push_back({cur, 0});
  int k = 1;
  if (f.kind == PolyKind::Phat && n_max >= 2) {
    const double next = rc.c * (shift * cur - rc.lam * (1.0 - f.z) * prev);
    prev = cur;
    cur = next;
    out.push_back({cur, 0});
    k = 2;
  }
  for (; k < n_max; ++k) {
    const double next = rc.c * (shift * cur - rc.lam * prev);
    prev = cur;
    cur = next;
    rescale(prev, cur, exponent);
    out.push_back({cur, exponent});
  }
  return out;
}

ScaledValue eval_poly_scaled(const PolyFamily& f, int n, double x) {
  return eval_sequence(f, n, x).back();
}

double eval_poly(const PolyFamily& f, int n, double x) {
  return eval_poly_scaled(f, n, x).value();
}

namespace {

struct SymTridiag {
  std::vector<double> d;
  double e2 = 0.0;  // squared off-diagonal, constant
  double e = 0.0;
};

SymTridiag symmetrized(const PolyFamily& f, int n) {
  if (n < 1) throw InvalidArgument("degree must be >= 1");
  const auto& p = f.params;
  SymTridiag t;
  t.d.assign(n, -p.lambda - p.mu1 - p.mu2 * (1.0 - f.z));
  t.d[0] = -p.lambda - p.mu2 * (1.0 - f.z);
  if (f.kind == PolyKind::Phat) t.d[n - 1] += p.lambda;
  t.e2 = p.lambda * p.mu1 / f.z;
  t.e = std::sqrt(t.e2);
  return t;
}

int sturm_count(const SymTridiag& t, double x) {
  const int n = static_cast<int>(t.d.size());
  const double tiny = std::numeric_limits<double>::min() * 4.0;
  int count = 0;
  double q = t.d[0] - x;
  for (int i = 0;; ++i) {
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
    if (i + 1 == n) break;
    q = (t.d[i + 1] - x) - t.e2 / q;
  }
  return count;
}

// k-th smallest eigenvalue (1-based) by bisection on the Sturm count.
double kth_eigenvalue(const SymTridiag& t, int k) {
  const int n = static_cast<int>(t.d.size());
  double lo = *std::min_element(t.d.begin(), t.d.end()) - 2.0 * t.e;
  double hi = *std::max_element(t.d.begin(), t.d.end()) + 2.0 * t.e;
  if (n == 1) return t.d[0];
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (sturm_count(t, mid) >= k ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

int count_zeros_below(const PolyFamily& f, int n, double x) {
  return sturm_count(symmetrized(f, n), x);
}

ZeroSet zeros(const PolyFamily& f, int n) {
  const SymTridiag t = symmetrized(f, n);
  ZeroSet zs;
  zs.n = n;
  zs.zeros.reserve(n);
  for (int k = 1; k <= n; ++k) zs.zeros.push_back(kth_eigenvalue(t, k));
  return zs;
}

double zero_at(const PolyFamily& f, int n, int i) {
  if (i < 1 || i > n) throw InvalidArgument("zero index out of range");
  return kth_eigenvalue(symmetrized(f, n), i);
}

double largest_zero(const PolyFamily& f, int n) { return zero_at(f, n, n); }

namespace {
// True when every zero of Phat_{m+1}(.; z) is negative, i.e. z lies above
// the root.
bool all_zeros_negative(const TandemParams& p, int m, double z) {
  return count_zeros_below(PolyFamily{p, z, PolyKind::Phat}, m + 1, 0.0) == m + 1;
}
}  // namespace

double compute_zhat(const TandemParams& p, int m, double tol) {
  validate_rates(p);
  if (m < 1) throw InvalidArgument("compute_zhat needs m >= 1");
  TandemParams fin = p;
  fin.capacity = Capacity::finite(m);
  const StabilityReport st = stability_check(fin);
  if (!st.stable) throw InstabilityError("unstable for this m: " + st.describe());

  // g(1) = 0, so the upper bracket is found by walking towards 1.
  double hi = -1.0;
  for (int k = 1; k <= 48; ++k) {
    const double z = 1.0 - std::ldexp(1.0, -k);
    if (all_zeros_negative(p, m, z)) {
      hi = z;
      break;
    }
  }
  if (hi < 0.0)
    throw ConvergenceError("no sign change of the largest zero below 1");
  double lo = hi;
  while (all_zeros_negative(p, m, lo)) {
    lo *= 0.5;
    if (lo < 1e-300) throw ConvergenceError("no positive largest zero near 0");
  }
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (tol > 0.0 && hi - lo < tol) break;
    (all_zeros_negative(p, m, mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

ZhatStudy zhat_limit_study(const TandemParams& p, int m_max, double tol) {
  if (m_max < 1) throw InvalidArgument("m_max must be >= 1");
  ZhatStudy s;
  s.limit = regime_of(p) == Regime::FirstBottleneck ? compute_eta(p, 0.0)
                                                     : p.rho2();
  for (int m = 1; m <= m_max; ++m) {
    const double z = compute_zhat(p, m, tol);
    s.m.push_back(m);
    s.zhat.push_back(z);
    s.gap.push_back(std::abs(z - s.limit));
  }
  s.strictly_increasing = true;
  s.gap_strictly_decreasing = true;
  for (std::size_t i = 1; i < s.zhat.size(); ++i) {
    if (!(s.zhat[i] > s.zhat[i - 1])) s.strictly_increasing = false;
    if (!(s.gap[i] < s.gap[i - 1])) s.gap_strictly_decreasing = false;
  }
  return s;
}

}  // namespace tandem
