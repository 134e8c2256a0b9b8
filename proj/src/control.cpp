#include "tandem/control.hpp"

#include <algorithm>
#include <cmath>

#include "tandem/oracle.hpp"

namespace tandem {

const char* to_string(DesignKind k) {
  return k == DesignKind::ArrivalMod ? "ArrivalMod" : "RemovalMod";
}

namespace {

// Enough terms that the neglected tail is below 1e-18 of the last needed one.
int terms_for_tail(const InvariantMeasure& w, int phase_cap) {
  const double r = w.tail_ratio();
  if (!(r < 1.0)) throw InfeasibleTarget("invariant measure is not summable");
  const double extra = (std::log(1e-18) + std::log(1.0 - r)) / std::log(r);
  const double n = phase_cap + 1.5 * extra + 50.0;
  if (n > 2e7) throw InfeasibleTarget("invariant measure decays too slowly to materialize");
  return static_cast<int>(n);
}

void require_positive(const std::vector<double>& rates, std::size_t from) {
  for (std::size_t i = from; i < rates.size(); ++i)
    if (!(rates[i] > 0.0) || !std::isfinite(rates[i]))
      throw ConvergenceError("designed rate is not strictly positive at phase " +
                             std::to_string(i));
}

}  // namespace

BoundaryDesign design_arrival_rates(const TandemParams& p, double z, int phase_cap) {
  validate_rates(p);
  if (phase_cap < 1) throw InvalidArgument("phase_cap must be >= 1");
  if (!(z > 0.0 && z < 1.0)) throw InfeasibleTarget("target decay must lie in (0, 1)");
  const Classification cl = classify(p, z);
  if (!cl.feasible) throw InfeasibleTarget("target decay is not feasible");
  BoundaryDesign d{z, DesignKind::ArrivalMod, {}, solve_w(p, z, phase_cap + 1), phase_cap};
  const std::vector<double> w = d.w.materialize(terms_for_tail(d.w, phase_cap));
  const double k = p.mu1 - p.mu2 * z;
  d.rates.resize(phase_cap + 1);
  double tail = 0.0;  // sum_{j > i} w_j
  for (int j = static_cast<int>(w.size()) - 1; j > phase_cap; --j) tail += w[j];
  for (int i = phase_cap; i >= 0; --i) {
    d.rates[i] = k * tail / w[i];
    tail += w[i];
  }
  require_positive(d.rates, 0);
  return d;
}

BoundaryDesign design_removal_rates(const TandemParams& p, double z, int phase_cap) {
  validate_rates(p);
  if (phase_cap < 1) throw InvalidArgument("phase_cap must be >= 1");
  if (!(p.mu1 < p.mu2)) throw InfeasibleTarget("removal design needs mu1 < mu2");
  const double eta = compute_eta(p, 0.0);
  if (!(z >= eta && z < p.rho2()))
    throw InfeasibleTarget("removal design needs eta <= z < rho2");
  BoundaryDesign d{z, DesignKind::RemovalMod, {}, solve_w(p, z, phase_cap + 1), phase_cap};
  if (!d.w.positive() || !d.w.in_ell1())
    throw InfeasibleTarget("invariant measure is not positive and summable");
  const std::vector<double> w = d.w.materialize(terms_for_tail(d.w, phase_cap));
  const double c = p.lambda + p.mu1 - p.mu2 * z;
  d.rates.assign(phase_cap + 1, 0.0);
  // nu_i w_i = sum_{j >= i} (lambda w_{j-1} - c w_j); each term is positive.
  double tail = 0.0;
  for (int j = static_cast<int>(w.size()) - 1; j >= 1; --j) {
    tail += p.lambda * w[j - 1] - c * w[j];
    if (j <= phase_cap) d.rates[j] = tail / w[j];
  }
  require_positive(d.rates, 1);
  return d;
}

std::vector<double> arrival_rates_forward(const TandemParams& p, double z,
                                          const std::vector<double>& w) {
  std::vector<double> lam(w.size(), 0.0);
  if (w.empty()) return lam;
  lam[0] = p.mu2 * z;
  for (std::size_t i = 1; i < w.size(); ++i)
    lam[i] = lam[i - 1] * w[i - 1] / w[i] + p.mu2 * z - p.mu1;
  return lam;
}

std::vector<double> removal_rates_forward(const TandemParams& p, double z,
                                          const std::vector<double>& w) {
  std::vector<double> nu(w.size(), 0.0);
  if (w.size() < 2) return nu;
  const double c = p.lambda + p.mu1 - p.mu2 * z;
  nu[1] = (p.lambda - p.mu2 * z) * w[0] / w[1];
  for (std::size_t i = 1; i + 1 < w.size(); ++i)
    nu[i + 1] = ((nu[i] + c) * w[i] - p.lambda * w[i - 1]) / w[i + 1];
  return nu;
}

QbdBlocks build_modified_blocks(const TandemParams& p, const BoundaryDesign& d,
                                int phase_cap) {
  if (static_cast<int>(d.rates.size()) < phase_cap + 1)
    throw InvalidArgument("design rates are shorter than the phase cap");
  QbdBlocks b = build_blocks(p, phase_cap);
  const int n = b.phase_count;
  for (int i = 0; i < n; ++i) {
    if (d.kind == DesignKind::ArrivalMod) {
      if (i + 1 < n) {
        b.q1_boundary(i, i) += p.lambda - d.rates[i];
        b.q1_boundary(i, i + 1) = d.rates[i];
      }
    } else if (i > 0) {
      b.q1_boundary(i, i - 1) = d.rates[i];
      b.q1_boundary(i, i) -= d.rates[i];
    }
  }
  return b;
}

namespace {
// Last index with w_j >= threshold, scanning up to a hard limit.
int significant_phases(const InvariantMeasure& w, double threshold, int limit) {
  int j = 0;
  while (j + 1 <= limit && w.at(j + 1) >= threshold) ++j;
  return j;
}
}  // namespace

int recommended_phase_cap(const InvariantMeasure& w, int level_cap, int floor,
                          double threshold) {
  // Boundary effects at the phase cap travel to lower phases as the level
  // grows, faster when w decays slowly.  The margin covers both.
  const int j = significant_phases(w, threshold, 20000);
  if (j >= 20000) throw InfeasibleTarget("invariant measure decays too slowly");
  return std::max(floor, 2 * level_cap + (3 * j + 1) / 2);
}

ProductFormReport verify_product_form(const QbdBlocks& b, double z,
                                      const InvariantMeasure& w, int level_cap,
                                      double tol, double decay_tol) {
  if (level_cap < 8) throw InvalidArgument("level_cap too small for a bulk window");
  const TruncatedChain chain = TruncatedChain::from_blocks(b, level_cap);
  const DirectSolution sol = solve_stationary_direct(chain);
  ProductFormReport r;
  r.target_z = z;
  r.level_cap = level_cap;
  r.phase_cap = b.phase_count - 1;
  r.level_lo = level_cap / 4;
  r.level_hi = 3 * level_cap / 4;
  r.solver_residual = sol.residual;
  r.measured_decay = estimate_decay(sol.level_marginals(), r.level_lo, r.level_hi);

  const int jmax =
      significant_phases(w, 1e-6, std::max(0, 2 * (r.phase_cap - 2 * level_cap) / 3));
  r.phase_hi = jmax;

  double acc = 0.0;
  long count = 0;
  for (int k = r.level_lo; k <= r.level_hi; ++k)
    for (int j = 0; j <= jmax; ++j) {
      acc += std::log(sol.pi(k, j)) - k * std::log(z) - std::log(w.at(j));
      ++count;
    }
  r.fitted_c = std::exp(acc / count);
  for (int k = r.level_lo; k <= r.level_hi; ++k)
    for (int j = 0; j <= jmax; ++j) {
      const double model = r.fitted_c * std::pow(z, k) * w.at(j);
      r.max_relative_deviation =
          std::max(r.max_relative_deviation, std::abs(sol.pi(k, j) / model - 1.0));
    }
  r.passed = r.max_relative_deviation < tol && std::abs(r.measured_decay - z) < decay_tol;
  return r;
}

}  // namespace tandem
