#include "doctest.h"

#include <cmath>

#include "tandem/control.hpp"
#include "tandem/oracle.hpp"
#include "tandem/qbd_core.hpp"

using namespace tandem;

TEST_CASE("arrival design for (1,2,3) at z = 0.5") {
  const auto p = make_params(1, 2, 3);
  const BoundaryDesign d = design_arrival_rates(p, 0.5, 600);
  CHECK(d.kind == DesignKind::ArrivalMod);
  CHECK(d.rates.size() == 601);
  CHECK(d.rates[0] == doctest::Approx(1.5).epsilon(1e-12));
  for (std::size_t i = 0; i < d.rates.size(); ++i) CHECK(d.rates[i] > 0);
  const auto fwd = arrival_rates_forward(p, 0.5, d.w.materialize(40));
  for (int i = 0; i < 40; ++i) CHECK(fwd[i] == doctest::Approx(d.rates[i]).epsilon(1e-8));
}

TEST_CASE("arrival design agrees with the forward recursion on a grid") {
  for (const auto& p : {make_params(1, 3, 2), make_params(1, 2, 3), make_params(2, 3, 5)}) {
    const Interval iv = spectral_report(p).feasible_decay_interval;
    for (double f : {0.05, 0.4, 0.8}) {
      const double z = iv.lower + f * (iv.upper - iv.lower);
      const BoundaryDesign d = design_arrival_rates(p, z, 500);
      for (double r : d.rates) CHECK(r > 0);
      const auto fwd = arrival_rates_forward(p, z, d.w.materialize(20));
      for (int i = 0; i < 20; ++i) CHECK(fwd[i] == doctest::Approx(d.rates[i]).epsilon(1e-7));
    }
  }
}

TEST_CASE("arrival design at the identity target reproduces the plain blocks") {
  // At z = rho2 with rho1 < rho2 the plain tandem already has w_j = rho1^j.
  const auto p = make_params(1, 3, 2);
  const BoundaryDesign d = design_arrival_rates(p, 0.5, 30);
  for (int i = 0; i <= 30; ++i) CHECK(d.rates[i] == doctest::Approx(1.0).epsilon(1e-12));
  const QbdBlocks a = build_modified_blocks(p, d, 30);
  const QbdBlocks b = build_blocks(p, 30);
  CHECK((a.q1_boundary - b.q1_boundary).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(conservation_defect(a) < 1e-12);
}

TEST_CASE("removal design for (1,2,3)") {
  const auto p = make_params(1, 2, 3);
  const double eta = compute_eta(p);
  for (double z : {eta, 0.32, 0.33}) {
    const BoundaryDesign d = design_removal_rates(p, z, 500);
    CHECK(d.kind == DesignKind::RemovalMod);
    CHECK(d.rates[0] == 0.0);
    for (int i = 1; i <= 500; ++i) CHECK(d.rates[i] > 0);
    const auto fwd = removal_rates_forward(p, z, d.w.materialize(12));
    for (int i = 1; i < 12; ++i) CHECK(fwd[i] == doctest::Approx(d.rates[i]).epsilon(1e-7));
    CHECK(d.rates[1] == doctest::Approx((1 - 3 * z) / d.w.at(1)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(design_removal_rates(p, 1.0 / 3, 50), InfeasibleTarget);
  CHECK_THROWS_AS(design_removal_rates(p, 0.5, 50), InfeasibleTarget);
  CHECK_THROWS_AS(design_removal_rates(p, eta - 1e-3, 50), InfeasibleTarget);
  CHECK_THROWS_AS(design_removal_rates(make_params(1, 3, 2), 0.4, 50), InfeasibleTarget);
}

TEST_CASE("arrival design rejects infeasible targets") {
  const auto p = make_params(1, 2, 3);
  CHECK_THROWS_AS(design_arrival_rates(p, 0.2, 50), InfeasibleTarget);
  CHECK_THROWS_AS(design_arrival_rates(p, 0.7, 50), InfeasibleTarget);
  CHECK_THROWS_AS(design_arrival_rates(p, 1.0, 50), InfeasibleTarget);
  CHECK_THROWS_AS(design_arrival_rates(p, 0.5, 0), InvalidArgument);
}

TEST_CASE("modified blocks keep the generator structure") {
  const auto p = make_params(1, 2, 3);
  for (const BoundaryDesign& d :
       {design_arrival_rates(p, 0.5, 60), design_removal_rates(p, 0.32, 60)}) {
    const QbdBlocks b = build_modified_blocks(p, d, 60);
    CHECK(conservation_defect(b) < 1e-12);
    CHECK_NOTHROW(check_generator_structure(b));
    CHECK((b.q1 - build_blocks(p, 60).q1).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(build_modified_blocks(p, design_arrival_rates(p, 0.5, 10), 20),
                  InvalidArgument);
}

TEST_CASE("w balances the level-0 row of the modified chain") {
  // w (Q1_boundary + z Q2) = 0 away from the phase cap.
  const auto p = make_params(1, 2, 3);
  for (const BoundaryDesign& d :
       {design_arrival_rates(p, 0.55, 120), design_removal_rates(p, 0.32, 120)}) {
    const QbdBlocks b = build_modified_blocks(p, d, 120);
    Eigen::RowVectorXd w(121);
    for (int j = 0; j <= 120; ++j) w(j) = d.w.at(j);
    const Eigen::RowVectorXd r = w * (b.q1_boundary + d.target_z * b.q2);
    for (int j = 0; j < 100; ++j) CHECK(std::abs(r(j)) < 1e-12 * (1 + w(j)));
  }
}

TEST_CASE("product form on a modified chain at L = 60") {
  const auto p = make_params(1, 2, 3);
  const BoundaryDesign d = design_arrival_rates(p, 0.5, 400);
  const int cap = recommended_phase_cap(d.w, 60, 60);
  REQUIRE(cap >= 120);
  REQUIRE(cap <= 400);
  const QbdBlocks b = build_modified_blocks(p, d, cap);
  const ProductFormReport r = verify_product_form(b, 0.5, d.w, 60, 1e-4);
  CHECK(r.passed);
  CHECK(r.max_relative_deviation < 1e-4);
  CHECK(r.measured_decay == doctest::Approx(0.5).epsilon(1e-3));
  CHECK_THROWS_AS(verify_product_form(b, 0.5, d.w, 4, 1e-4), InvalidArgument);
}
