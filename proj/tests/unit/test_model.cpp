#include "doctest.h"

#include <cmath>
#include <random>

#include "tandem/model.hpp"

using namespace tandem;

namespace {
Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}
}  // namespace

TEST_CASE("params reject non-positive or non-finite rates") {
  CHECK_THROWS_AS(make_params(0, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(make_params(1, -1, 1), InvalidArgument);
  CHECK_THROWS_AS(make_params(1, 1, NAN), InvalidArgument);
  CHECK_THROWS_AS(Capacity::finite(0), InvalidArgument);
  CHECK_THROWS_AS(Capacity::infinite().value(), InvalidArgument);
  CHECK(Capacity::finite(3).value() == 3);
  CHECK(Capacity::infinite() == Capacity::infinite());
  CHECK_FALSE(Capacity::finite(2) == Capacity::infinite());
}

TEST_CASE("blocks for (1,3,2,m=1)") {
  const auto p = make_params(1, 3, 2, Capacity::finite(1));
  const QbdBlocks b = build_blocks(p, 1);
  CHECK(b.phase_count == 2);
  CHECK(b.q0 == mat({{0, 0}, {3, 0}}));
  CHECK(b.q1 == mat({{-3, 1}, {0, -5}}));
  CHECK(b.q2 == mat({{2, 0}, {0, 2}}));
  // mu2 removed from the diagonal of Q1; the off-diagonal stays 0.
  CHECK(b.q1_boundary == mat({{-1, 1}, {0, -3}}));
  CHECK(conservation_defect(b) == 0.0);
  CHECK_FALSE(b.truncation_note.has_value());
  CHECK_NOTHROW(check_generator_structure(b));
}

TEST_CASE("build_blocks preconditions and truncation note") {
  CHECK_THROWS_AS(build_blocks(make_params(1, 3, 2), 0), InvalidArgument);
  CHECK_THROWS_AS(build_blocks(make_params(1, 3, 2, Capacity::finite(2)), 3), InvalidArgument);
  const QbdBlocks b = build_blocks(make_params(1, 3, 2), 5);
  CHECK(b.phase_count == 6);
  CHECK(b.truncation_note.has_value());
}

TEST_CASE("generator conservation and tandem structure on a grid") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int t = 0; t < 40; ++t) {
    const int m = 1 + t % 9;
    const auto p = make_params(u(gen), u(gen), u(gen), Capacity::finite(m));
    const QbdBlocks b = build_blocks(p, m);
    CHECK(conservation_defect(b) < 1e-14);
    CHECK_NOTHROW(check_generator_structure(b));
    CHECK(b.q2.isApprox(p.mu2 * Eigen::MatrixXd::Identity(m + 1, m + 1)));
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j) CHECK(b.q0(i, j) == (i == j + 1 ? p.mu1 : 0.0));
  }
  const QbdBlocks b = build_blocks(make_params(1, 1, 1, Capacity::finite(2)), 2);
  CHECK((b.q0 + b.q1 + b.q2).rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stability rules") {
  auto s = stability_check(make_params(1, 3, 2, Capacity::finite(1)));
  CHECK(s.stable);
  CHECK(s.rule == StabilityRule::FiniteRhoNotOne);
  CHECK(s.lhs == doctest::Approx(0.5));
  CHECK(s.rhs == doctest::Approx(4.0 / 3.0));
  CHECK(stability_check(make_params(1, 2, 2)).stable);
  CHECK(stability_check(make_params(1, 2, 2)).rule == StabilityRule::InfiniteCapacity);
  CHECK_FALSE(stability_check(make_params(2, 1, 5)).stable);
  s = stability_check(make_params(2, 2, 3, Capacity::finite(4)));
  CHECK(s.rule == StabilityRule::FiniteRhoOne);
  CHECK(s.stable);  // rho2 = 2/3 < 5/4
  CHECK_FALSE(s.describe().empty());
  CHECK_FALSE(stability_check(make_params(1, 3, 0.5, Capacity::finite(1))).stable);
  CHECK(stability_check(make_params(3, 1, 2, Capacity::finite(2))).stable);  // rho1 > 1 allowed
}

TEST_CASE("characteristic matrix") {
  const auto p = make_params(1, 3, 2);
  const double z = 0.4;
  const Eigen::MatrixXd q = characteristic_matrix(p, z, 4, CharVariant::Interior);
  const Eigen::MatrixXd c = characteristic_matrix(p, z, 4, CharVariant::Capped);
  for (int i = 0; i < 3; ++i) {
    CHECK(q(i, i + 1) == 1.0);
    CHECK(q(i + 1, i) == doctest::Approx(3.0 / z));
  }
  CHECK(q(0, 2) == 0.0);
  CHECK(q(1, 1) == doctest::Approx(-1 - 3 - 2 * (1 - z)));
  CHECK(q(0, 0) == doctest::Approx(-1 - 2 * (1 - z)));
  CHECK(c(3, 3) == doctest::Approx(q(3, 3) + 1.0));
  CHECK(c.topLeftCorner(3, 3) == q.topLeftCorner(3, 3));
  // Q(z) = Q0/z + Q1 + z Q2 in the interior.
  const QbdBlocks b = build_blocks(make_params(1, 3, 2, Capacity::finite(3)), 3);
  const Eigen::MatrixXd direct = b.q0 / z + b.q1 + z * b.q2;
  CHECK((direct - c).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("tau, sigma, chi values") {
  const auto p = make_params(1, 2, 3);
  CHECK(tau(p, 1.0 / 3.0) == doctest::Approx(-std::pow(std::sqrt(2.0) - std::sqrt(3.0), 2)));
  CHECK(tau(p, 1.0 / 3.0) == doctest::Approx(-0.1010).epsilon(1e-3));
  CHECK(chi(p, 1.0) == 0.0);
  CHECK(sigma(p, 0.3) < tau(p, 0.3));
  CHECK_THROWS_AS(tau(p, 0.0), InvalidArgument);
  CHECK_THROWS_AS(chi(p, -0.1), InvalidArgument);
}

TEST_CASE("tau(rho2) identity over a grid") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.1, 4.0);
  for (int t = 0; t < 50; ++t) {
    const double a = u(gen), b = u(gen);
    const auto p = make_params(0.05 + 0.9 * std::min(a, b) * 0.5, a, b);
    CHECK(tau(p, p.rho2()) ==
          doctest::Approx(-std::pow(std::sqrt(p.mu1) - std::sqrt(p.mu2), 2)).epsilon(1e-12));
  }
}

TEST_CASE("chi1 branch rule against max(tau, chi)") {
  // tau - chi = -(sqrt(mu1) - sqrt(lambda/z))^2, so the branch rule equals the
  // max above rho1 and the min at or below it.
  for (const auto& p : {make_params(1, 3, 2), make_params(1, 2, 3), make_params(0.4, 0.9, 2.5)}) {
    for (int i = 1; i < 100; ++i) {
      const double z = i / 100.0;
      const double t = tau(p, z), c = chi(p, z);
      CHECK(t - c == doctest::Approx(-std::pow(std::sqrt(p.mu1) - std::sqrt(p.lambda / z), 2))
                         .epsilon(1e-10)
                         .scale(1.0));
      if (z > p.rho1()) {
        CHECK(chi1(p, z) == std::max(t, c));
        CHECK(chi1_max_disagreement(p, z) <= 1e-12);
      } else {
        CHECK(chi1(p, z) == std::min(t, c));
      }
    }
    // Both branches meet at rho1.
    CHECK(tau(p, p.rho1()) == doctest::Approx(chi(p, p.rho1())).epsilon(1e-12));
  }
}

TEST_CASE("eta") {
  CHECK(compute_eta(make_params(1, 2, 2)) == doctest::Approx(0.5).epsilon(1e-12));
  const double e123 = compute_eta(make_params(1, 2, 3));
  CHECK(e123 == doctest::Approx(0.311940742508029).epsilon(1e-12));
  const auto p = make_params(1, 3, 2);
  const double e132 = compute_eta(p);
  CHECK(e132 == doctest::Approx(0.468).epsilon(2e-3));
  CHECK(p.rho1() < e132);
  CHECK(e132 < p.rho2());
  CHECK(std::abs(tau(p, e132)) < 1e-12);
  CHECK(std::abs(compute_eta(p, 1e-6) - e132) < 1e-6);
  // lambda = mu1: tau(1) = 0; the interior root survives when tau'(1) > 0.
  const double e112 = compute_eta(make_params(1, 1, 2));
  CHECK(e112 < 1.0);
  CHECK(std::abs(tau(make_params(1, 1, 2), e112)) < 1e-12);
  CHECK_THROWS_AS(compute_eta(make_params(1, 1, 0.5)), ConvergenceError);
}

TEST_CASE("sign of tau, convexity and orderings on a grid") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    const double lam = 0.2 + u(gen);
    const auto p = make_params(lam, lam * (1.05 + 2 * u(gen)), lam * (1.05 + 2 * u(gen)));
    const double eta = compute_eta(p);
    for (int i = 1; i < 50; ++i) {
      const double z = i / 50.0;
      if (std::abs(z - eta) < 1e-9) continue;
      CHECK((tau(p, z) < 0.0) == (z > eta));
    }
    const double a = 0.01 + 0.98 * u(gen), b = 0.01 + 0.98 * u(gen);
    CHECK(tau(p, 0.5 * (a + b)) <= 0.5 * (tau(p, a) + tau(p, b)) + 1e-12);
    const double z1 = compute_z1(p);
    CHECK(z1 < 0.0);
    CHECK(z1 > -1.0);
    if (p.mu1 <= p.mu2) {
      CHECK(eta <= p.rho2() + 1e-15);
      CHECK(p.rho2() <= p.rho1());
    } else {
      CHECK(p.rho1() < eta);
      CHECK(eta < p.rho2());
    }
    CHECK(p.rho1() < 1.0);
  }
}

TEST_CASE("z1 closed form") {
  CHECK(compute_z1(make_params(1, 2, 3)) == doctest::Approx((7 - std::sqrt(73.0)) / 6));
  CHECK(compute_z1(make_params(1, 2, 3)) == doctest::Approx(-0.2573).epsilon(1e-3));
}

TEST_CASE("spectral report") {
  auto r = spectral_report(make_params(1, 2, 3));
  CHECK(r.regime == Regime::FirstBottleneck);
  CHECK(r.feasible_decay_interval.lower == doctest::Approx(0.311940742508029));
  CHECK(r.feasible_decay_interval.upper == doctest::Approx(2.0 / 3.0));
  r = spectral_report(make_params(1, 3, 2));
  CHECK(r.regime == Regime::SecondBottleneck);
  CHECK(r.feasible_decay_interval.lower == 0.5);
  CHECK(r.feasible_decay_interval.upper == 1.0);
  CHECK(r.feasible_decay_interval.contains(0.5));
  CHECK_FALSE(r.feasible_decay_interval.contains(1.0));
  r = spectral_report(make_params(1, 2, 2));
  CHECK(r.feasible_decay_interval.lower == doctest::Approx(0.5));
  CHECK(r.feasible_decay_interval.upper == 1.0);
  CHECK(std::string(to_string(r.regime)) == "FirstBottleneck");
  CHECK_THROWS_AS(spectral_report(make_params(2, 1, 5)), InstabilityError);
}
