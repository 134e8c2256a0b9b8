#pragma once

#include <vector>

#include "tandem/invariant.hpp"
#include "tandem/model.hpp"

namespace tandem {

enum class DesignKind { ArrivalMod, RemovalMod };
const char* to_string(DesignKind k);

struct BoundaryDesign {
  double target_z = 0.0;
  DesignKind kind = DesignKind::ArrivalMod;
  // ArrivalMod: level-0 arrival rate per phase 0..phase_cap.
  // RemovalMod: level-0 removal rate per phase, entry 0 unused and zero.
  std::vector<double> rates;
  InvariantMeasure w;
  int phase_cap = 0;
};

// Rates from tail sums of w; equal to the forward recursions but without
// their error growth.
BoundaryDesign design_arrival_rates(const TandemParams& p, double z, int phase_cap);
BoundaryDesign design_removal_rates(const TandemParams& p, double z, int phase_cap);

// Forward recursions for the same rates, used as independent checks.
std::vector<double> arrival_rates_forward(const TandemParams& p, double z,
                                          const std::vector<double>& w);
std::vector<double> removal_rates_forward(const TandemParams& p, double z,
                                          const std::vector<double>& w);

QbdBlocks build_modified_blocks(const TandemParams& p, const BoundaryDesign& d,
                                int phase_cap);

// Phase cap for a direct solve at level_cap: at least floor, and at least
// 2 level_cap + 1.5 J where J is the last phase with w_j >= threshold.
int recommended_phase_cap(const InvariantMeasure& w, int level_cap, int floor = 80,
                          double threshold = 1e-6);

struct ProductFormReport {
  double target_z = 0.0;
  double measured_decay = 0.0;
  double max_relative_deviation = 0.0;
  double fitted_c = 0.0;
  int level_cap = 0;
  int phase_cap = 0;
  int level_lo = 0, level_hi = 0;  // bulk window of levels
  int phase_hi = 0;                // phases 0..phase_hi compared
  double solver_residual = 0.0;
  bool passed = false;
};

// Direct solve of the truncated chain, then comparison of pi_{kj} with
// c z^k w_j over levels [L/4, 3L/4] and phases j <= 2(P - 2L)/3 with
// w_j >= 1e-6.  passed requires the deviation below
// tol and the decay within decay_tol of z.
ProductFormReport verify_product_form(const QbdBlocks& b, double z,
                                      const InvariantMeasure& w, int level_cap,
                                      double tol, double decay_tol = 1e-3);

}  // namespace tandem
