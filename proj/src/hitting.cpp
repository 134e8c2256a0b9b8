#include "tandem/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tandem/orthopoly.hpp"

namespace tandem {

Eigen::MatrixXd h_step(const QbdBlocks& b, const Eigen::MatrixXd& h_prev) {
  const Eigen::MatrixXd a = b.q1 + b.q2 * h_prev;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double det = lu.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det))
    throw SingularMatrix("ladder step matrix Q1 + Q2 H is singular");
  Eigen::MatrixXd h = -lu.solve(b.q0);
  // Entries are probabilities; clip rounding noise at zero.
  return h.cwiseMax(0.0);
}

double h_equation_residual(const QbdBlocks& b, const Eigen::MatrixXd& h) {
  return (b.q0 + b.q1 * h + b.q2 * h * h).cwiseAbs().maxCoeff();
}

HittingLadder h_sequence(const QbdBlocks& b, int k_max) {
  if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
  HittingLadder lad;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(b.phase_count, b.phase_count);
  lad.h_seq.reserve(k_max);
  for (int k = 1; k <= k_max; ++k) {
    h = h_step(b, h);
    lad.h_seq.push_back(h);
  }
  lad.iterations = k_max;
  lad.residual = h_equation_residual(b, h);
  return lad;
}

HittingLadder solve_H(const QbdBlocks& b, double tol, long max_iterations) {
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  HittingLadder lad;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(b.phase_count, b.phase_count);
  for (long it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd next = h_step(b, h);
    const double diff = (next - h).cwiseAbs().maxCoeff();
    h = next;
    if (diff < tol) {
      lad.h_seq = {h};
      lad.h_star = h;
      lad.iterations = it;
      lad.residual = h_equation_residual(b, h);
      return lad;
    }
  }
  throw ConvergenceError("H iteration cap exceeded");
}

Eigen::MatrixXd exit_probabilities(const QbdBlocks& b, int k, int big_k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (k >= big_k) throw InvalidArgument("exit probabilities need k < K");
  const int n = b.phase_count;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(n, n);
  for (int step = 1; step < big_k; ++step) {
    h = h_step(b, h);
    if (step >= k) prod = prod * h;
  }
  return prod;
}

namespace {

double fitted_slope(const std::vector<int>& xs, const std::vector<double>& ys,
                    std::size_t from) {
  const std::size_t n = xs.size() - from;
  double mx = 0, my = 0;
  for (std::size_t t = from; t < xs.size(); ++t) {
    mx += xs[t];
    my += ys[t];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t t = from; t < xs.size(); ++t) {
    sxy += (xs[t] - mx) * (ys[t] - my);
    sxx += (xs[t] - mx) * (xs[t] - mx);
  }
  return sxy / sxx;
}

}  // namespace

HittingDecay hitting_decay_estimate(const TandemParams& p, const QbdBlocks& b,
                                    int i, int j, int k_max) {
  const int n = b.phase_count;
  if (i < 0 || i >= n || j < 0 || j >= n) throw InvalidArgument("phase out of range");
  if (k_max < 4) throw InvalidArgument("K_max must be >= 4");

  HittingDecay d;
  d.i = i;
  d.j = j;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(n);
  x(i) = 1.0;
  double log_scale = 0.0;
  std::vector<double> log_rows;
  // x holds row i of P_1^K up to exp(log_scale).
  for (int big_k = 2; big_k <= k_max; ++big_k) {
    h = h_step(b, h);
    x = x * h;
    const double mx = x.maxCoeff();
    if (!(mx > 0.0)) throw ConvergenceError("exit probabilities vanished");
    x /= mx;
    log_scale += std::log(mx);
    if (!(x(j) > 0.0))
      throw InvalidArgument("entry (i, j) of the exit probabilities is structurally zero");
    d.levels.push_back(big_k);
    d.log_p.push_back(std::log(x(j)) + log_scale);
    log_rows.push_back(std::log(x.sum()) + log_scale);
  }
  for (std::size_t t = 0; t + 1 < d.log_p.size(); ++t) {
    d.ratios.push_back(std::exp(d.log_p[t + 1] - d.log_p[t]));
    d.row_sum_ratios.push_back(std::exp(log_rows[t + 1] - log_rows[t]));
  }
  d.ratio_estimate = d.ratios.back();
  d.row_sum_estimate = d.row_sum_ratios.back();
  d.log_average = std::exp(d.log_p.back() / k_max);
  d.log_slope_estimate = std::exp(fitted_slope(d.levels, d.log_p, d.levels.size() / 2));

  if (p.capacity.is_finite()) {
    d.reference = compute_zhat(p, p.capacity.value());
    d.reference_label = "zhat";
  } else if (regime_of(p) == Regime::FirstBottleneck) {
    d.reference = compute_eta(p, 0.0);
    d.reference_label = "eta";
  } else {
    d.reference = p.rho2();
    d.reference_label = "rho2";
  }
  d.gap = std::abs(d.ratio_estimate - d.reference);
  return d;
}

std::vector<double> distribution_decay_ratios(const QbdBlocks& b,
                                              const Eigen::RowVectorXd& x0,
                                              int k_max) {
  const int n = b.phase_count;
  if (x0.size() != n) throw InvalidArgument("start vector has wrong size");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  const double s0 = x0.sum();
  if (!(s0 > 0.0)) throw InvalidArgument("start vector must have positive mass");
  Eigen::RowVectorXd x = x0 / s0;
  std::vector<double> out;
  double log_scale = std::log(s0);
  double prev_log = log_scale;
  for (int big_k = 2; big_k <= k_max; ++big_k) {
    h = h_step(b, h);
    x = x * h;
    const double s = x.sum();
    if (!(s > 0.0)) break;
    x /= s;
    log_scale += std::log(s);
    out.push_back(std::exp(log_scale - prev_log));
    prev_log = log_scale;
  }
  return out;
}

std::vector<int> support_phases(const Eigen::MatrixXd& h, double threshold) {
  std::vector<int> out;
  for (int c = 0; c < h.cols(); ++c)
    if (h.col(c).maxCoeff() > threshold) out.push_back(c);
  return out;
}

bool strongly_connected(const Eigen::MatrixXd& m, const std::vector<int>& nodes,
                        double threshold) {
  if (nodes.empty()) return false;
  auto reach_all = [&](bool forward) {
    std::vector<char> seen(nodes.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      for (std::size_t c = 0; c < nodes.size(); ++c) {
        const double v = forward ? m(nodes[a], nodes[c]) : m(nodes[c], nodes[a]);
        if (!seen[c] && v > threshold) {
          seen[c] = 1;
          stack.push_back(c);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
  };
  return reach_all(true) && reach_all(false);
}

}  // namespace tandem
