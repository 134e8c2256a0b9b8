#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace tandem {

struct Measurement {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<", "<=", ">", ">=", "=="
  bool gating = true;    // false: reported only
  bool passed = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Measurement> measurements;
  std::string note;
  bool passed() const;
};

struct ValidationOptions {
  double tol = 1e-13;  // tolerance handed to the iterative solvers
  std::uint64_t seed = 20240917;
  long replications = 1'000'000;
  std::set<int> only;  // empty: every criterion
};

std::vector<CriterionResult> run_acceptance(const ValidationOptions& opts);

// Individual criteria, numbered as in the acceptance list.
CriterionResult criterion_product_form(const ValidationOptions& opts);
CriterionResult criterion_r_zhat_bridge(const ValidationOptions& opts);
CriterionResult criterion_zhat_regimes(const ValidationOptions& opts);
CriterionResult criterion_invariant_closed_forms(const ValidationOptions& opts);
CriterionResult criterion_classification(const ValidationOptions& opts);
CriterionResult criterion_decay_control(const ValidationOptions& opts);
CriterionResult criterion_hitting(const ValidationOptions& opts);
CriterionResult criterion_orthopoly(const ValidationOptions& opts);
CriterionResult criterion_simulation(const ValidationOptions& opts);

// Relative error of Phat_n(chi(z); z) against (1-z)(lambda/mu1)^n, with the
// recursion run in 100-digit arithmetic.
double phat_chi_identity_error(double lambda, double mu1, double mu2, double z, int n);

}  // namespace tandem
