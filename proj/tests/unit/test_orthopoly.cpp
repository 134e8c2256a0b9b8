#include "doctest.h"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "tandem/invariant.hpp"
#include "tandem/orthopoly.hpp"
#include "tandem/qbd_core.hpp"

using namespace tandem;
using Big = boost::multiprecision::cpp_bin_float_100;

namespace {

// Largest eigenvalue of Xi(z) = z((lambda+mu1+mu2) I + Qhat(z)) / (lambda+mu1+mu2),
// a nonnegative matrix; zhat is the fixed point z = xi(z).
double xi(const TandemParams& p, int m, double z) {
  const double s = p.lambda + p.mu1 + p.mu2;
  const Eigen::MatrixXd q = characteristic_matrix(p, z, m + 1, CharVariant::Capped);
  const Eigen::MatrixXd x = z * (s * Eigen::MatrixXd::Identity(m + 1, m + 1) + q) / s;
  return perron_root(x);
}

double xi_fixed_point(const TandemParams& p, int m) {
  double lo = 1e-9, hi = 1.0 - 1e-9;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (xi(p, m, mid) < mid ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Eigenvalues of a tridiagonal matrix with positive off-diagonal products,
// taken from its symmetrized form; the nonsymmetric dense solver is only
// good to about 1e-7 here.
std::vector<double> dense_eigs(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i, i) = a(i, i);
    if (i + 1 < n) {
      REQUIRE(a(i, i + 1) * a(i + 1, i) > 0);
      s(i, i + 1) = s(i + 1, i) = std::sqrt(a(i, i + 1) * a(i + 1, i));
    }
  }
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + n);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("base cases of the recursions") {
  const auto p = make_params(1, 3, 2);
  for (double z : {0.2, 0.5, 0.9}) {
    const auto fp = make_family(p, z, PolyKind::P), fh = make_family(p, z, PolyKind::Phat);
    CHECK(eval_poly(fp, 0, 1.7) == 1.0);
    CHECK(eval_poly(fh, 0, -4.0) == 1.0);
    CHECK(zeros(fp, 1).zeros[0] == doctest::Approx(-1 - 2 * (1 - z)));
    CHECK(zeros(fh, 1).zeros[0] == doctest::Approx(-2 * (1 - z)));
    // Phat_n = P_n - (lambda z / mu1) P_{n-1}
    for (int n = 1; n < 8; ++n)
      CHECK(eval_poly(fh, n, -1.3) ==
            doctest::Approx(eval_poly(fp, n, -1.3) - z / 3 * eval_poly(fp, n - 1, -1.3)));
  }
  CHECK_THROWS_AS(make_family(p, 0.0, PolyKind::P), InvalidArgument);
  CHECK_THROWS_AS(zeros(make_family(p, 0.5, PolyKind::P), 0), InvalidArgument);
}

TEST_CASE("zeros equal eigenvalues of the characteristic matrices") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const auto p = make_params(0.3 + u(gen), 0.3 + 3 * u(gen), 0.3 + 3 * u(gen));
    const double z = 0.05 + 0.9 * u(gen);
    const int n = 2 + t;
    const auto zp = zeros(make_family(p, z, PolyKind::P), n).zeros;
    const auto zh = zeros(make_family(p, z, PolyKind::Phat), n).zeros;
    const auto ep = dense_eigs(characteristic_matrix(p, z, n, CharVariant::Interior));
    const auto eh = dense_eigs(characteristic_matrix(p, z, n, CharVariant::Capped));
    const double scale = 2 * (p.lambda + p.mu1 + p.mu2 + std::sqrt(p.lambda * p.mu1 / z));
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(zp[i] - ep[i]) < 1e-12 * scale);
      CHECK(std::abs(zh[i] - eh[i]) < 1e-12 * scale);
    }
    for (int i = 1; i < n; ++i) CHECK(zp[i - 1] < zp[i]);
    CHECK(count_zeros_below(make_family(p, z, PolyKind::P), n, zp[n / 2] + 1e-9) == n / 2 + 1);
  }
}

TEST_CASE("double evaluation against 100-digit evaluation") {
  const auto p = make_params(1, 2, 3);
  for (double z : {0.3, 0.7}) {
    const auto f = make_family(p, z, PolyKind::P);
    for (double x : {-6.0, -2.5, 0.0, 1.5}) {
      const auto seq = eval_sequence(f, 400, x);
      for (int n : {1, 5, 40, 150, 400}) {
        const Big exact = eval_poly_as<Big>(f, n, Big(x));
        if (exact == 0) continue;
        const double le = static_cast<double>(boost::multiprecision::log(boost::multiprecision::abs(exact)));
        CHECK(seq[n].sign() == (exact > 0 ? 1 : -1));
        CHECK(seq[n].log_abs() == doctest::Approx(le).epsilon(1e-9).scale(1.0));
        CHECK(eval_poly_scaled(f, n, x).log_abs() == doctest::Approx(seq[n].log_abs()));
      }
    }
  }
  // No overflow where P_n itself exceeds the double range.
  const auto f = make_family(p, 0.05, PolyKind::P);
  const ScaledValue big = eval_poly_scaled(f, 3000, 1000.0);
  CHECK(std::isfinite(big.mantissa));
  CHECK(big.log_abs() > 710.0);
}

TEST_CASE("Phat at chi(z) equals (1-z) rho1^n for n >= 1") {
  for (const auto& p : {make_params(1, 3, 2), make_params(1, 2, 3), make_params(0.5, 4, 1)}) {
    for (double frac : {0.1, 0.5, 0.9}) {
      const double z = p.rho1() + (1 - p.rho1()) * frac;
      const auto f = make_family(p, z, PolyKind::Phat);
      const Big x = (Big(p.lambda) / Big(z) - Big(p.mu2)) * (Big(1) - Big(z));
      for (int n = 1; n <= 60; ++n) {
        const Big want = (Big(1) - Big(z)) * boost::multiprecision::pow(Big(p.lambda) / p.mu1, n);
        CHECK(static_cast<double>(boost::multiprecision::abs(eval_poly_as<Big>(f, n, x) / want - 1)) <
              1e-10);
      }
    }
  }
}

TEST_CASE("w_n = P_n(0; z)") {
  for (const auto& p : {make_params(1, 3, 2), make_params(1, 2, 3)}) {
    for (double z : {0.2, 0.45, 0.6, 0.9}) {
      const InvariantMeasure w = solve_w(p, z, 201);
      const auto seq = eval_sequence(make_family(p, z, PolyKind::P), 200, 0.0);
      for (int k = 0; k <= 200; ++k)
        CHECK(std::abs(seq[k].value() - w.at(k)) <= 1e-10 * w.envelope(k));
    }
  }
}

TEST_CASE("zhat for m = 1 and the Xi fixed point") {
  const auto p1 = make_params(1, 3, 2, Capacity::finite(1));
  CHECK(compute_zhat(p1, 1) == doctest::Approx((3 - std::sqrt(6.0)) / 2).epsilon(1e-14));
  CHECK(compute_zhat(p1, 1) == doctest::Approx(0.27526).epsilon(1e-5));
  for (const auto& base : {make_params(1, 3, 2), make_params(1, 2, 3), make_params(2, 3, 4)}) {
    for (int m : {1, 2, 3, 5, 8, 13}) {
      const auto p = make_params(base.lambda, base.mu1, base.mu2, Capacity::finite(m));
      const double zh = compute_zhat(p, m);
      CHECK(std::abs(zh - xi_fixed_point(p, m)) < 1e-12);
      // Largest eigenvalue of Qhat^(m+1)(zhat) is zero.
      const auto ev = dense_eigs(characteristic_matrix(p, zh, m + 1, CharVariant::Capped));
      CHECK(std::abs(ev.back()) < 1e-10 * (p.lambda + p.mu1 + p.mu2) * (m + 1));
      CHECK(std::abs(compute_zhat(p, m, 1e-6) - zh) < 1e-6);
    }
  }
  // Unstable finite system: no root in (0, 1).
  CHECK_THROWS_AS(compute_zhat(make_params(1, 3, 0.5, Capacity::finite(1)), 1), InstabilityError);
}

TEST_CASE("zhat limit study") {
  const ZhatStudy a = zhat_limit_study(make_params(1, 3, 2), 40);
  CHECK(a.limit == 0.5);
  CHECK(a.strictly_increasing);
  CHECK(a.gap_strictly_decreasing);
  CHECK(a.zhat.front() == doctest::Approx(0.2753).epsilon(1e-4));
  const ZhatStudy b = zhat_limit_study(make_params(1, 2, 3), 40);
  CHECK(b.limit == doctest::Approx(0.311940742511446));
  CHECK(b.strictly_increasing);
  CHECK(b.gap_strictly_decreasing);
  CHECK(b.zhat.back() < b.limit);
  CHECK_THROWS_AS(zhat_limit_study(make_params(1, 2, 3), 0), InvalidArgument);
}

TEST_CASE("interlacing on random cases") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const double lam = 0.2 + u(gen);
    const auto p = make_params(lam, lam * (0.5 + 3 * u(gen)), lam * (0.5 + 3 * u(gen)));
    // Low degree keeps the top zeros of consecutive degrees apart in double.
    const double z = 0.05 + 0.9 * u(gen);
    const int n = 2 + static_cast<int>(u(gen) * 18);
    const auto xn = zeros(make_family(p, z, PolyKind::P), n).zeros;
    const auto xm = zeros(make_family(p, z, PolyKind::P), n - 1).zeros;
    const auto xh = zeros(make_family(p, z, PolyKind::Phat), n).zeros;
    for (int i = 0; i + 1 < n; ++i) {
      CHECK(xn[i] < xm[i]);
      CHECK(xm[i] < xn[i + 1]);
      CHECK(xn[i] < xh[i]);
      CHECK(xh[i] < xn[i + 1]);
    }
    CHECK(xh[n - 1] > xn[n - 1]);
  }
}

TEST_CASE("extreme zeros: monotone with limits sigma, tau, chi1") {
  struct Case {
    TandemParams p;
    double z;
  };
  // z below rho1 (chi1 = tau) and above it (chi1 = chi).
  for (const Case& c : {Case{make_params(1, 2, 3), 0.3}, Case{make_params(1, 2, 3), 0.8},
                        Case{make_params(1, 3, 2), 0.6}}) {
    const auto f = make_family(c.p, c.z, PolyKind::P);
    double first = 0, second = 0, last = 0;
    for (int n = 3; n <= 400; ++n) {
      const double x1 = zero_at(f, n, 1), xs = zero_at(f, n, n - 1), xl = zero_at(f, n, n);
      if (n > 3) {
        CHECK(x1 < first);
        CHECK(xs > second);
        CHECK(xl >= last);  // equal once the top zero has converged in double
      }
      first = x1;
      second = xs;
      last = xl;
    }
    CHECK(first - sigma(c.p, c.z) < 1e-3);
    CHECK(first > sigma(c.p, c.z));
    CHECK(tau(c.p, c.z) - second < 1e-3);
    CHECK(chi1(c.p, c.z) - last < 1e-3);
    CHECK(last <= chi1(c.p, c.z) + 1e-12);
  }
}

TEST_CASE("positivity of P_n is decided by chi1") {
  for (const auto& p : {make_params(1, 2, 3), make_params(1, 3, 2)}) {
    for (double z : {0.25, 0.5, 0.8}) {
      const auto f = make_family(p, z, PolyKind::P);
      const double c1 = chi1(p, z);
      // On the tau branch the top zero creeps up like (pi/n)^2.
      const int horizon = z <= p.rho1() ? 2000 : 200;
      const auto above = eval_sequence(f, horizon, c1 + 1e-4);
      const auto below = eval_sequence(f, horizon, c1 - 1e-4);
      bool all_pos = true, some_neg = false;
      for (int n = 0; n <= horizon; ++n) {
        all_pos = all_pos && above[n].sign() > 0;
        some_neg = some_neg || below[n].sign() < 0;
      }
      CHECK(all_pos);
      CHECK(some_neg);
    }
  }
}
