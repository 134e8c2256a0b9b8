#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "tandem/model.hpp"

namespace tandem {

struct RSolution {
  Eigen::MatrixXd r;
  double spectral_radius = 0.0;
  long iterations = 0;
  double residual = 0.0;  // max-abs of Q0 + R Q1 + R^2 Q2
};

struct RSolveOptions {
  double tol = 1e-12;
  long max_iterations = 1'000'000;
};

// Natural fixed-point iteration R <- -(Q0 + R^2 Q2) Q1^{-1} from R = 0.
// Stops once both the successive difference and the equation residual are
// below tol.
RSolution solve_R(const QbdBlocks& b, const RSolveOptions& opts = {});
RSolution solve_R(const QbdBlocks& b, double tol);

double r_equation_residual(const QbdBlocks& b, const Eigen::MatrixXd& r);

struct StationaryDistribution {
  std::vector<Eigen::RowVectorXd> pi;  // levels 0..level_cap
  int level_cap = 0;
  double tail_mass = 0.0;              // mass above level_cap
  double normalization_error = 0.0;    // |1 - (emitted mass + tail_mass)|

  Eigen::VectorXd level_marginals() const;
  double at(int level, int phase) const { return pi.at(level)(phase); }
};

StationaryDistribution stationary(const QbdBlocks& b, const RSolution& r,
                                  int level_cap);

// Row vector y with y A = 0, y(0) = 1.  Throws SingularMatrix when the left
// null space is not one-dimensional.
Eigen::RowVectorXd left_null_vector(const Eigen::MatrixXd& a);

// Full spectrum sorted by modulus, largest first.
std::vector<std::complex<double>> eigen_spectrum(const Eigen::MatrixXd& a);
// Perron root of a nonnegative matrix by power iteration.  The full
// eigensolver is unreliable here: R and H carry large defective zero blocks
// whose computed eigenvalues scatter to eps^(1/size).
double perron_root(const Eigen::MatrixXd& a, double tol = 1e-15,
                   long max_iterations = 1'000'000);
// perron_root for nonnegative input, largest eigenvalue modulus otherwise.
double spectral_radius(const Eigen::MatrixXd& a);

// Greedy pairing of two spectra; returns the largest pairwise distance, or
// infinity when the sizes differ.
double spectrum_distance(std::vector<std::complex<double>> a,
                         std::vector<std::complex<double>> b);

}  // namespace tandem
