#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <vector>

#include "tandem/model.hpp"

namespace tandem {

struct Transition {
  int from;
  int to;
  double rate;
};

// Finite two-dimensional chain on levels 0..L and phases 0..P.  Transitions
// leaving the box are dropped, so the generator stays conservative.
class TruncatedChain {
 public:
  // Tandem rates built directly from the parameters.  A non-empty
  // level0_arrivals replaces lambda at level 0 phase by phase; a non-empty
  // level0_removals adds a rate from (0, j) to (0, j - 1).
  static TruncatedChain tandem(const TandemParams& p, int level_cap, int phase_cap,
                               const std::vector<double>& level0_arrivals = {},
                               const std::vector<double>& level0_removals = {});
  static TruncatedChain from_blocks(const QbdBlocks& b, int level_cap);

  int level_cap() const { return level_cap_; }
  int phase_cap() const { return phase_cap_; }
  int state_count() const { return (level_cap_ + 1) * (phase_cap_ + 1); }
  int index(int level, int phase) const { return level * (phase_cap_ + 1) + phase; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  Eigen::SparseMatrix<double> generator() const;
  // Largest |to - from| below and above the diagonal.
  int lower_bandwidth() const;
  int upper_bandwidth() const;

 private:
  TruncatedChain(int l, int p) : level_cap_(l), phase_cap_(p) {}
  void add(int from, int to, double rate);
  int level_cap_;
  int phase_cap_;
  std::vector<Transition> transitions_;
};

struct DirectSolution {
  Eigen::MatrixXd pi;  // (L+1) x (P+1), row = level
  double residual = 0.0;  // max-abs of pi Q

  Eigen::VectorXd level_marginals() const { return pi.rowwise().sum(); }
};

// Banded GTH elimination; subtraction-free, so small probabilities keep
// their relative accuracy.
DirectSolution solve_stationary_direct(const TruncatedChain& chain);

// Median of successive ratios m[k+1]/m[k] for k in [lo, hi).
double estimate_decay(const Eigen::VectorXd& level_marginals, int lo, int hi);

struct HittingEstimate {
  std::vector<double> probability;     // per phase at the first visit to level K
  std::vector<double> standard_error;  // binomial
  std::vector<long> counts;
  long replications = 0;
};

// Counter-based generator: output n of stream (seed, stream) is a fixed hash
// of the triple, so replications can run in any order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next_u64();
  double uniform();  // [0, 1)

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Embedded jump chain of the QBD from (start_level, start_phase) until level
// 0 or level K is first hit.
HittingEstimate simulate_hitting(const QbdBlocks& b, int start_level, int start_phase,
                                 int big_k, long replications, std::uint64_t seed,
                                 int threads = 1);

}  // namespace tandem
