#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "tandem/model.hpp"

namespace tandem {

struct HittingLadder {
  std::vector<Eigen::MatrixXd> h_seq;  // H_1 .. H_k
  Eigen::MatrixXd h_star;              // fixed point, filled by solve_H
  double residual = 0.0;               // max-abs of Q0 + Q1 H + Q2 H^2
  long iterations = 0;
};

// H_k = -(Q1 + Q2 H_{k-1})^{-1} Q0 from H_0 = 0.
HittingLadder h_sequence(const QbdBlocks& b, int k_max);
// Iterates the ladder until successive differences drop below tol; keeps
// only the last iterate in h_seq.
HittingLadder solve_H(const QbdBlocks& b, double tol = 1e-13,
                      long max_iterations = 1'000'000);

double h_equation_residual(const QbdBlocks& b, const Eigen::MatrixXd& h);

// One ladder step from H_{k-1} to H_k.
Eigen::MatrixXd h_step(const QbdBlocks& b, const Eigen::MatrixXd& h_prev);

// P_k^K = H_k H_{k+1} ... H_{K-1}.
Eigen::MatrixXd exit_probabilities(const QbdBlocks& b, int k, int big_k);

struct HittingDecay {
  int i = 0, j = 0;
  std::vector<int> levels;         // K values of log_p
  std::vector<double> log_p;       // log P_1^K(i, j)
  std::vector<double> ratios;      // P_1^{K+1}(i,j) / P_1^K(i,j), K = levels[..]
  std::vector<double> row_sum_ratios;  // same for sum_j P_1^K(i, j)
  double ratio_estimate = 0.0;     // last successive ratio
  double log_average = 0.0;        // exp(log P_1^K / K) at K_max
  double log_slope_estimate = 0.0; // exp of fitted slope over [K_max/2, K_max]
  double row_sum_estimate = 0.0;
  double reference = 0.0;          // zhat_{m+1}, eta or rho2
  std::string reference_label;
  double gap = 0.0;                // |ratio_estimate - reference|
};

HittingDecay hitting_decay_estimate(const TandemParams& p, const QbdBlocks& b,
                                    int i, int j, int k_max);

// Decay of x P_1^K summed over phases for a start distribution x.
std::vector<double> distribution_decay_ratios(const QbdBlocks& b,
                                              const Eigen::RowVectorXd& x,
                                              int k_max);

// Phases carrying positive mass in some column of h.
std::vector<int> support_phases(const Eigen::MatrixXd& h, double threshold = 0.0);
// Strong connectivity of the graph {i -> j : m(i,j) > threshold} on nodes.
bool strongly_connected(const Eigen::MatrixXd& m, const std::vector<int>& nodes,
                        double threshold = 0.0);

}  // namespace tandem
