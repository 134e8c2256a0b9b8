#include "tandem/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace tandem {

void TruncatedChain::add(int from, int to, double rate) {
  if (rate > 0.0) transitions_.push_back({from, to, rate});
}

TruncatedChain TruncatedChain::tandem(const TandemParams& p, int level_cap, int phase_cap,
                                      const std::vector<double>& level0_arrivals,
                                      const std::vector<double>& level0_removals) {
  validate_rates(p);
  if (level_cap < 0 || phase_cap < 0) throw InvalidArgument("caps must be >= 0");
  if (p.capacity.is_finite() && phase_cap != p.capacity.value())
    throw InvalidArgument("phase_cap must equal the finite capacity m");
  if (!level0_arrivals.empty() && static_cast<int>(level0_arrivals.size()) < phase_cap + 1)
    throw InvalidArgument("level-0 arrival rates shorter than the phase cap");
  if (!level0_removals.empty() && static_cast<int>(level0_removals.size()) < phase_cap + 1)
    throw InvalidArgument("level-0 removal rates shorter than the phase cap");

  TruncatedChain c(level_cap, phase_cap);
  for (int k = 0; k <= level_cap; ++k) {
    for (int j = 0; j <= phase_cap; ++j) {
      const int s = c.index(k, j);
      if (j < phase_cap) {
        const double arr = (k == 0 && !level0_arrivals.empty()) ? level0_arrivals[j] : p.lambda;
        c.add(s, c.index(k, j + 1), arr);
      }
      if (j > 0 && k < level_cap) c.add(s, c.index(k + 1, j - 1), p.mu1);
      if (k > 0) c.add(s, c.index(k - 1, j), p.mu2);
      if (k == 0 && j > 0 && !level0_removals.empty())
        c.add(s, c.index(0, j - 1), level0_removals[j]);
    }
  }
  return c;
}

TruncatedChain TruncatedChain::from_blocks(const QbdBlocks& b, int level_cap) {
  if (level_cap < 0) throw InvalidArgument("level_cap must be >= 0");
  const int n = b.phase_count;
  TruncatedChain c(level_cap, n - 1);
  for (int k = 0; k <= level_cap; ++k) {
    const Eigen::MatrixXd& local = k == 0 ? b.q1_boundary : b.q1;
    for (int i = 0; i < n; ++i) {
      const int s = c.index(k, i);
      for (int j = 0; j < n; ++j) {
        if (j != i) c.add(s, c.index(k, j), local(i, j));
        if (k < level_cap) c.add(s, c.index(k + 1, j), b.q0(i, j));
        if (k > 0) c.add(s, c.index(k - 1, j), b.q2(i, j));
      }
    }
  }
  return c;
}

Eigen::SparseMatrix<double> TruncatedChain::generator() const {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * transitions_.size());
  for (const auto& t : transitions_) {
    trip.emplace_back(t.from, t.to, t.rate);
    trip.emplace_back(t.from, t.from, -t.rate);
  }
  Eigen::SparseMatrix<double> q(state_count(), state_count());
  q.setFromTriplets(trip.begin(), trip.end());
  return q;
}

int TruncatedChain::lower_bandwidth() const {
  int bw = 0;
  for (const auto& t : transitions_) bw = std::max(bw, t.from - t.to);
  return bw;
}

int TruncatedChain::upper_bandwidth() const {
  int bw = 0;
  for (const auto& t : transitions_) bw = std::max(bw, t.to - t.from);
  return bw;
}

DirectSolution solve_stationary_direct(const TruncatedChain& chain) {
  const int n = chain.state_count();
  DirectSolution out;
  if (n == 1) {
    out.pi = Eigen::MatrixXd::Ones(1, 1);
    return out;
  }
  const int bl = std::max(1, chain.lower_bandwidth());
  const int bu = std::max(1, chain.upper_bandwidth());
  const long width = bl + bu + 1;
  // a[i][j] at band[i * width + (j - i + bl)]
  std::vector<double> band(static_cast<std::size_t>(n) * width, 0.0);
  auto at = [&](int i, int j) -> double& {
    return band[static_cast<std::size_t>(i) * width + (j - i + bl)];
  };
  for (const auto& t : chain.transitions()) at(t.from, t.to) += t.rate;

  for (int s = n - 1; s >= 1; --s) {
    const int jlo = std::max(0, s - bl);
    const int ilo = std::max(0, s - bu);
    double total = 0.0;
    for (int j = jlo; j < s; ++j) total += at(s, j);
    if (!(total > 0.0))
      throw SingularMatrix("truncated chain is not irreducible");
    for (int i = ilo; i < s; ++i) {
      double& ais = at(i, s);
      if (ais == 0.0) continue;
      ais /= total;
      const double c = ais;
      for (int j = jlo; j < s; ++j)
        if (j != i) at(i, j) += c * at(s, j);
    }
  }
  std::vector<double> x(n, 0.0);
  x[0] = 1.0;
  double sum = 1.0;
  for (int s = 1; s < n; ++s) {
    double v = 0.0;
    for (int i = std::max(0, s - bu); i < s; ++i) v += x[i] * at(i, s);
    x[s] = v;
    sum += v;
  }
  const int phases = chain.phase_cap() + 1;
  out.pi.resize(chain.level_cap() + 1, phases);
  for (int s = 0; s < n; ++s) out.pi(s / phases, s % phases) = x[s] / sum;

  std::vector<double> r(n, 0.0);
  for (const auto& t : chain.transitions()) {
    const double f = out.pi(t.from / phases, t.from % phases) * t.rate;
    r[t.to] += f;
    r[t.from] -= f;
  }
  for (double v : r) out.residual = std::max(out.residual, std::abs(v));
  return out;
}

double estimate_decay(const Eigen::VectorXd& m, int lo, int hi) {
  const int last = static_cast<int>(m.size()) - 1;
  if (lo < 0 || hi <= lo) throw InvalidArgument("decay window must satisfy 0 <= lo < hi");
  if (hi >= last) throw InvalidArgument("decay window touches the level cap");
  std::vector<double> ratios;
  for (int k = lo; k < hi; ++k) {
    if (!(m(k) > 0.0)) throw InvalidArgument("level marginal vanishes inside the window");
    ratios.push_back(m(k + 1) / m(k));
  }
  const std::size_t h = ratios.size() / 2;
  std::nth_element(ratios.begin(), ratios.begin() + h, ratios.end());
  if (ratios.size() % 2 == 1) return ratios[h];
  const double upper = ratios[h];
  const double lower = *std::max_element(ratios.begin(), ratios.begin() + h);
  return 0.5 * (lower + upper);
}

namespace {
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix(splitmix(seed) ^ (stream * 0xd1342543de82ef95ULL + 1))) {}

std::uint64_t CounterRng::next_u64() {
  return splitmix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

namespace {

struct JumpTable {
  // For each phase: cumulative rates over moves, each move = (level delta,
  // target phase).
  std::vector<std::vector<double>> cumulative;
  std::vector<std::vector<std::pair<int, int>>> moves;
};

JumpTable interior_jumps(const QbdBlocks& b) {
  const int n = b.phase_count;
  JumpTable t;
  t.cumulative.resize(n);
  t.moves.resize(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    auto push = [&](int dl, int j, double r) {
      if (r <= 0.0) return;
      acc += r;
      t.cumulative[i].push_back(acc);
      t.moves[i].emplace_back(dl, j);
    };
    for (int j = 0; j < n; ++j) {
      push(+1, j, b.q0(i, j));
      if (j != i) push(0, j, b.q1(i, j));
      push(-1, j, b.q2(i, j));
    }
    if (t.moves[i].empty()) throw InvalidArgument("phase without outgoing transitions");
  }
  return t;
}

}  // namespace

HittingEstimate simulate_hitting(const QbdBlocks& b, int start_level, int start_phase,
                                 int big_k, long replications, std::uint64_t seed,
                                 int threads) {
  const int n = b.phase_count;
  if (big_k < 2) throw InvalidArgument("K must be >= 2");
  if (replications < 1) throw InvalidArgument("replications must be >= 1");
  if (start_phase < 0 || start_phase >= n) throw InvalidArgument("start phase out of range");
  if (start_level < 0 || start_level >= big_k)
    throw InvalidArgument("start level must lie in [0, K)");
  HittingEstimate est;
  est.replications = replications;
  est.counts.assign(n, 0);
  if (start_level > 0) {
    const JumpTable table = interior_jumps(b);
    auto run = [&](long from, long to, std::vector<long>& counts) {
      for (long r = from; r < to; ++r) {
        CounterRng rng(seed, static_cast<std::uint64_t>(r));
        int level = start_level, phase = start_phase;
        while (level > 0 && level < big_k) {
          const auto& cum = table.cumulative[phase];
          const double u = rng.uniform() * cum.back();
          const auto pos = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
          const auto [dl, j] = table.moves[phase][std::min<std::size_t>(pos, cum.size() - 1)];
          level += dl;
          phase = j;
        }
        if (level == big_k) ++counts[phase];
      }
    };
    const int workers = std::max(1, threads);
    std::vector<std::vector<long>> partial(workers, std::vector<long>(n, 0));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const long from = replications * w / workers;
      const long to = replications * (w + 1) / workers;
      if (workers == 1) run(from, to, partial[w]);
      else pool.emplace_back(run, from, to, std::ref(partial[w]));
    }
    for (auto& th : pool) th.join();
    for (const auto& part : partial)
      for (int j = 0; j < n; ++j) est.counts[j] += part[j];
  }
  for (int j = 0; j < n; ++j) {
    const double p = static_cast<double>(est.counts[j]) / replications;
    est.probability.push_back(p);
    est.standard_error.push_back(std::sqrt(p * (1.0 - p) / replications));
  }
  return est;
}

}  // namespace tandem
