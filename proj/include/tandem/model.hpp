#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include "tandem/error.hpp"

namespace tandem {

enum class CapacityKind { Finite, Infinite };

// Waiting room of the first queue.  Infinite capacity is its own state; no
// sentinel integer stands in for it.
class Capacity {
 public:
  static Capacity finite(int m);
  static Capacity infinite() { return Capacity(CapacityKind::Infinite, 0); }

  CapacityKind kind() const { return kind_; }
  bool is_finite() const { return kind_ == CapacityKind::Finite; }
  // Throws InvalidArgument for infinite capacity.
  int value() const;
  std::string to_string() const;

  friend bool operator==(const Capacity&, const Capacity&) = default;

 private:
  Capacity(CapacityKind kind, int m) : kind_(kind), m_(m) {}
  CapacityKind kind_;
  int m_;
};

struct TandemParams {
  double lambda = 1.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  Capacity capacity = Capacity::infinite();

  double rho1() const { return lambda / mu1; }
  double rho2() const { return lambda / mu2; }
};

// Validates that all rates are finite and strictly positive.
TandemParams make_params(double lambda, double mu1, double mu2,
                         Capacity capacity = Capacity::infinite());
void validate_rates(const TandemParams& p);

enum class Regime { FirstBottleneck, SecondBottleneck };
Regime regime_of(const TandemParams& p);
const char* to_string(Regime r);

// Generator blocks of the level-independent QBD.  Levels count the second
// queue, phases the first queue.
struct QbdBlocks {
  int phase_count = 0;
  Eigen::MatrixXd q0;           // one level up
  Eigen::MatrixXd q1;           // within a level, level >= 1
  Eigen::MatrixXd q2;           // one level down
  Eigen::MatrixXd q1_boundary;  // within level 0
  // Set when an infinite waiting room was cut down to a finite surrogate.
  std::optional<std::string> truncation_note;
};

QbdBlocks build_blocks(const TandemParams& p, int phase_cap);

// Largest absolute row sum of q0+q1+q2 and q1_boundary+q0.
double conservation_defect(const QbdBlocks& b);
// Throws InvalidArgument when sign or conservation structure is broken.
void check_generator_structure(const QbdBlocks& b, double tol = 1e-12);

enum class StabilityRule { FiniteRhoNotOne, FiniteRhoOne, InfiniteCapacity };

struct StabilityReport {
  bool stable = false;
  StabilityRule rule = StabilityRule::InfiniteCapacity;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string describe() const;
};

StabilityReport stability_check(const TandemParams& p);

enum class CharVariant { Interior, Capped };

// Tridiagonal n x n matrix Q^(n)(z) (Interior) or its capped version whose
// last row has no arrival term.
Eigen::MatrixXd characteristic_matrix(const TandemParams& p, double z, int n,
                                      CharVariant variant);

double tau(const TandemParams& p, double z);
double sigma(const TandemParams& p, double z);
double chi(const TandemParams& p, double z);
// tau below or at rho1, chi above it.
double chi1(const TandemParams& p, double z);
// |chi1(z) - max(tau(z), chi(z))|.  Nonzero exactly where the branch rule
// picks the smaller of the two functions.
double chi1_max_disagreement(const TandemParams& p, double z);

// Root of tau in (0,1).  tol is the bracket width on the argument; a value
// <= 0 bisects until the bracket no longer shrinks.
double compute_eta(const TandemParams& p, double tol = 0.0);
double compute_z1(const TandemParams& p);

// Half-open interval [lower, upper).
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double z) const { return z >= lower && z < upper; }
};

struct SpectralReport {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double eta = 0.0;
  double z1 = 0.0;
  Regime regime = Regime::FirstBottleneck;
  Interval feasible_decay_interval;
  StabilityReport stability;
};

// Throws InstabilityError unless lambda < min(mu1, mu2).
SpectralReport spectral_report(const TandemParams& p, double tol = 0.0);

}  // namespace tandem
