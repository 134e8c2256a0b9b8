#include "tandem/validation.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>

#include "tandem/control.hpp"
#include "tandem/hitting.hpp"
#include "tandem/invariant.hpp"
#include "tandem/oracle.hpp"
#include "tandem/orthopoly.hpp"
#include "tandem/qbd_core.hpp"

namespace tandem {

namespace {

// Pinned tolerances of the acceptance list.
constexpr double kProductFormRel = 1e-6;
constexpr double kMassFloor = 1e-12;
constexpr double kDecayTol1 = 1e-4;
constexpr double kBridgeTol = 1e-8;
constexpr double kCompanionTol = 1e-6;
constexpr double kClosedFormRel = 1e-10;
constexpr double kSpecialRel = 1e-12;
constexpr double kBoundaryOffset = 1e-3;
constexpr double kDesignDecayTol = 1e-3;
constexpr double kDesignDeviation = 1e-4;
constexpr double kH1Tol = 4.0 * std::numeric_limits<double>::epsilon();
constexpr double kEigenTol = 1e-8;
constexpr double kRatioTol = 1e-4;
constexpr double kDriftTol = 1e-3;
constexpr double kIdentityRel = 1e-10;
constexpr double kSigmaBand = 3.0;

Measurement measure(std::string name, double value, const char* rel, double threshold,
                    bool gating = true) {
  Measurement m{std::move(name), value, threshold, rel, gating, false};
  const std::string r = rel;
  if (r == "<") m.passed = value < threshold;
  else if (r == "<=") m.passed = value <= threshold;
  else if (r == ">") m.passed = value > threshold;
  else if (r == ">=") m.passed = value >= threshold;
  else m.passed = value == threshold;
  return m;
}

TandemParams finite(double l, double a, double b, int m) {
  return make_params(l, a, b, Capacity::finite(m));
}

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

// Roots of det(Q0 + z Q1 + z^2 Q2) from the linearization with Q2 = mu2 I.
std::vector<std::complex<double>> companion_roots(const QbdBlocks& b) {
  const int n = b.phase_count;
  const double mu2 = b.q2(0, 0);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  c.block(0, n, n, n) = -b.q0 / mu2;
  c.block(n, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
  c.block(n, n, n, n) = -b.q1 / mu2;
  return eigen_spectrum(c);
}

// Eigenvalues outside the cluster of a defective zero eigenvalue.  A Jordan
// block of size up to n scatters its computed copies to about eps^(1/n).
std::vector<std::complex<double>> nonzero_part(const std::vector<std::complex<double>>& ev,
                                               int n, std::size_t& zeros) {
  const double cut = 2.0 * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / n);
  std::vector<std::complex<double>> out;
  for (const auto& e : ev)
    if (std::abs(e) > cut) out.push_back(e);
  zeros = ev.size() - out.size();
  return out;
}

std::string pstr(const TandemParams& p) {
  auto f = [](double v) {
    std::string s = std::to_string(v);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
  };
  return "(" + f(p.lambda) + "," + f(p.mu1) + "," + f(p.mu2) +
         (p.capacity.is_finite() ? ",m=" + std::to_string(p.capacity.value()) : "") + ")";
}

}  // namespace

bool CriterionResult::passed() const {
  return std::all_of(measurements.begin(), measurements.end(),
                     [](const Measurement& m) { return !m.gating || m.passed; });
}

CriterionResult criterion_product_form(const ValidationOptions&) {
  CriterionResult r{1, "Jackson product form on (1,3,2)", {}, {}};
  const TandemParams p = make_params(1, 3, 2);
  auto compare = [&](int cap, double floor) {
    const DirectSolution sol = solve_stationary_direct(TruncatedChain::tandem(p, cap, cap));
    double worst = 0.0;
    for (int k = 0; k <= 40; ++k)
      for (int j = 0; j <= 40; ++j) {
        const double exact = (1 - p.rho2()) * std::pow(p.rho2(), k) * (1 - p.rho1()) *
                             std::pow(p.rho1(), j);
        if (exact <= floor) continue;
        worst = std::max(worst, std::abs(sol.pi(k, j) / exact - 1.0));
      }
    return std::make_pair(worst, sol);
  };
  const auto [err60, sol60] = compare(60, kMassFloor);
  r.measurements.push_back(
      measure("max rel error k,j<=40, mass>1e-12, caps 60/60", err60, "<", kProductFormRel));
  const double decay = estimate_decay(sol60.level_marginals(), 15, 45);
  r.measurements.push_back(measure("|level decay - 0.5|, caps 60/60", std::abs(decay - 0.5), "<",
                                   kDecayTol1));
  const auto [err60_all, unused60] = compare(60, 0.0);
  (void)unused60;
  r.measurements.push_back(measure("max rel error k,j<=40, all states, caps 60/60", err60_all,
                                   "<", kProductFormRel, false));
  const auto [err100_all, unused100] = compare(100, 0.0);
  (void)unused100;
  r.measurements.push_back(
      measure("max rel error k,j<=40, all states, caps 100/100", err100_all, "<",
              kProductFormRel));
  r.note = "at 60/60 the states near (40,40) carry mass ~1e-27 and feel the phase cap";
  return r;
}

CriterionResult criterion_r_zhat_bridge(const ValidationOptions& opts) {
  CriterionResult r{2, "sp(R_m) = zhat_{m+1} bridge", {}, {}};
  double worst = 0.0, worst_companion = 0.0;
  for (const auto& base : {make_params(1, 3, 2), make_params(1, 2, 3)}) {
    for (int m = 1; m <= 6; ++m) {
      const TandemParams p = finite(base.lambda, base.mu1, base.mu2, m);
      const QbdBlocks b = build_blocks(p, m);
      const RSolution rs = solve_R(b, opts.tol);
      worst = std::max(worst, std::abs(rs.spectral_radius - compute_zhat(p, m)));

      std::size_t zr = 0, zc = 0;
      const auto from_r = nonzero_part(eigen_spectrum(rs.r), b.phase_count, zr);
      std::vector<std::complex<double>> from_c;
      for (const auto& e : nonzero_part(companion_roots(b), b.phase_count, zc))
        if (std::abs(e) < 1.0 - 1e-8) from_c.push_back(e);
      worst_companion = std::max(worst_companion, spectrum_distance(from_r, from_c));
    }
  }
  r.measurements.push_back(
      measure("max |sp(R_m) - zhat_{m+1}|, m<=6, (1,3,2),(1,2,3)", worst, "<", kBridgeTol));
  r.measurements.push_back(measure("nonzero spectrum of R_m vs roots inside the unit disk",
                                   worst_companion, "<", kCompanionTol));
  const double analytic = (3.0 - std::sqrt(6.0)) / 2.0;
  const TandemParams p1 = finite(1, 3, 2, 1);
  const double sp1 = solve_R(build_blocks(p1, 1), opts.tol).spectral_radius;
  r.measurements.push_back(
      measure("|sp(R_1) - (3-sqrt6)/2|, (1,3,2)", std::abs(sp1 - analytic), "<", kBridgeTol));
  r.measurements.push_back(measure("|zhat_2 - (3-sqrt6)/2|, (1,3,2)",
                                   std::abs(compute_zhat(p1, 1) - analytic), "<", kBridgeTol));
  return r;
}

CriterionResult criterion_zhat_regimes(const ValidationOptions&) {
  CriterionResult r{3, "zhat limits by regime", {}, {}};
  const ZhatStudy s132 = zhat_limit_study(make_params(1, 3, 2), 40);
  const ZhatStudy s123 = zhat_limit_study(make_params(1, 2, 3), 40);
  r.measurements.push_back(
      measure("zhat strictly increasing, (1,3,2)", s132.strictly_increasing, "==", 1));
  r.measurements.push_back(
      measure("zhat strictly increasing, (1,2,3)", s123.strictly_increasing, "==", 1));
  const double ratio = s132.gap[9] / s132.gap[39];
  r.measurements.push_back(measure("gap(m=10)/gap(m=40) to 0.5, (1,3,2)", ratio, ">=", 10.0));
  const double z40 = s123.zhat[39];
  const double eta = compute_eta(make_params(1, 2, 3));
  const double to_eta = std::abs(z40 - eta), to_rho2 = std::abs(z40 - 1.0 / 3.0);
  r.measurements.push_back(measure("gap to eta at m=40, (1,2,3)", to_eta, "<", to_rho2, false));
  r.measurements.push_back(measure("gap to rho2 / gap to eta at m=40, (1,2,3)",
                                   to_rho2 / to_eta, ">", 1.0));
  r.measurements.push_back(measure("eta, (1,2,3)", eta, "==", eta, false));
  return r;
}

CriterionResult criterion_invariant_closed_forms(const ValidationOptions& opts) {
  CriterionResult r{4, "invariant measure closed forms", {}, {}};
  std::mt19937_64 gen(opts.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst[3] = {0, 0, 0};
  int regime_mismatch = 0;
  const MeasureRegime want[3] = {MeasureRegime::RealRoots, MeasureRegime::Degenerate,
                                 MeasureRegime::Oscillating};
  for (int c = 0; c < 50; ++c) {
    const double lam = 0.2 + 0.8 * uni(gen);
    const double mu1 = lam * (1.1 + 3.0 * uni(gen));
    const double mu2 = lam * (1.1 + 3.0 * uni(gen));
    const TandemParams p = make_params(lam, mu1, mu2);
    const double eta = compute_eta(p);
    const int kind = c % 3;
    double z = 0.0;
    if (kind == 0) z = (c % 2 == 0) ? -0.95 * uni(gen) : eta + (0.98 - eta) * uni(gen);
    else if (kind == 1) z = eta;
    else z = eta * (0.05 + 0.9 * uni(gen));
    const InvariantMeasure w = solve_w(p, z, 201);
    if (w.regime() != want[kind]) ++regime_mismatch;
    const std::vector<double> rec = w_recursion_oracle(p, z, 201);
    for (int k = 0; k <= 200; ++k)
      worst[kind] = std::max(worst[kind], std::abs(w.at(k) - rec[k]) / w.envelope(k));
  }
  r.measurements.push_back(measure("regime mismatches over 50 cases", regime_mismatch, "==", 0));
  r.measurements.push_back(measure("max rel error, real roots", worst[0], "<", kClosedFormRel));
  r.measurements.push_back(measure("max rel error, degenerate", worst[1], "<", kClosedFormRel));
  r.measurements.push_back(measure("max rel error, oscillating", worst[2], "<", kClosedFormRel));

  double special = 0.0;
  for (const auto& p : {make_params(1, 3, 2), make_params(1, 5, 4), make_params(3, 5, 4),
                        make_params(1, 4, 2)}) {
    const InvariantMeasure w = solve_w(p, p.rho2(), 201);
    for (int k = 0; k <= 200; ++k)
      special = std::max(special, std::abs(w.at(k) / std::pow(p.rho1(), k) - 1.0));
  }
  r.measurements.push_back(
      measure("max |w_k / rho1^k - 1| at z = rho2, k<=200", special, "<", kSpecialRel));
  return r;
}

CriterionResult criterion_classification(const ValidationOptions&) {
  CriterionResult r{5, "feasibility classification", {}, {}};
  int disagreements = 0, boundary_failures = 0;
  auto nonneg_upto = [](const TandemParams& p, double z, int n) {
    const InvariantMeasure w = solve_w(p, z, n);
    for (int k = 0; k < n; ++k)
      if (w.at(k) < 0.0) return false;
    return true;
  };
  // rho2 exactly representable where it is the lower end, so w at the
  // endpoint is the pure special solution.
  for (const auto& p : {make_params(1, 2, 3), make_params(1, 3, 2), make_params(2, 3, 5),
                        make_params(3, 5, 4)}) {
    const SpectralReport rep = spectral_report(p);
    for (int i = 0; i < 100; ++i) {
      const double z = (i + 0.5) / 100.0;
      if (classify(p, z).feasible != rep.feasible_decay_interval.contains(z)) ++disagreements;
    }
    const double lo = rep.feasible_decay_interval.lower;
    const double hi = rep.feasible_decay_interval.upper;
    const double d = kBoundaryOffset;
    if (!classify(p, hi - d).in_ell1) ++boundary_failures;
    if (hi < 1.0 && classify(p, hi + d).in_ell1) ++boundary_failures;
    if (!classify(p, lo + d).positive || !nonneg_upto(p, lo + d, 501)) ++boundary_failures;
    if (!nonneg_upto(p, lo, 501)) ++boundary_failures;
    for (double off : {d, 10 * d}) {
      if (classify(p, lo - off).positive || nonneg_upto(p, lo - off, 501)) ++boundary_failures;
    }
  }
  r.measurements.push_back(
      measure("verdict/interval disagreements on 4 x 100 grid", disagreements, "==", 0));
  r.measurements.push_back(
      measure("boundary test failures at +-1e-3 offsets", boundary_failures, "==", 0));
  return r;
}

CriterionResult criterion_decay_control(const ValidationOptions&) {
  CriterionResult r{6, "decay-rate control by boundary design", {}, {}};
  constexpr int kLevelCap = 100;
  struct Case {
    TandemParams p;
    DesignKind kind;
    double z;
  };
  const Case cases[] = {{make_params(1, 3, 2), DesignKind::ArrivalMod, 0.55},
                        {make_params(1, 3, 2), DesignKind::ArrivalMod, 0.7},
                        {make_params(1, 3, 2), DesignKind::ArrivalMod, 0.9},
                        {make_params(1, 2, 3), DesignKind::RemovalMod, 0.32},
                        {make_params(1, 2, 3), DesignKind::RemovalMod, 0.33}};
  for (const Case& c : cases) {
    const InvariantMeasure w = solve_w(c.p, c.z, 2);
    const int cap = recommended_phase_cap(w, kLevelCap);
    const BoundaryDesign d = c.kind == DesignKind::ArrivalMod
                                 ? design_arrival_rates(c.p, c.z, cap)
                                 : design_removal_rates(c.p, c.z, cap);
    const QbdBlocks b = build_modified_blocks(c.p, d, cap);
    const ProductFormReport pf = verify_product_form(b, c.z, d.w, kLevelCap, kDesignDeviation,
                                                     kDesignDecayTol);
    const std::string tag = std::string(to_string(c.kind)) + " z=" + std::to_string(c.z).substr(0, 4) +
                            " caps " + std::to_string(kLevelCap) + "/" + std::to_string(cap);
    const std::size_t first = c.kind == DesignKind::ArrivalMod ? 0 : 1;
    const double min_rate = *std::min_element(d.rates.begin() + first, d.rates.end());
    r.measurements.push_back(
        measure(tag + ": |decay - z|", std::abs(pf.measured_decay - c.z), "<", kDesignDecayTol));
    r.measurements.push_back(
        measure(tag + ": max rel deviation", pf.max_relative_deviation, "<", kDesignDeviation));
    r.measurements.push_back(measure(tag + ": min designed rate", min_rate, ">", 0.0));
  }
  return r;
}

CriterionResult criterion_hitting(const ValidationOptions& opts) {
  CriterionResult r{7, "hitting probabilities and hitting decay", {}, {}};
  const QbdBlocks b1 = build_blocks(finite(1, 3, 2, 1), 1);
  Eigen::MatrixXd h1_exact(2, 2);
  h1_exact << 0.2, 0.0, 0.6, 0.0;
  const Eigen::MatrixXd h1 = h_sequence(b1, 1).h_seq.front();
  r.measurements.push_back(measure("max |H_1 - [[0.2,0],[0.6,0]]|", max_abs(h1 - h1_exact), "<=",
                                   kH1Tol));

  double eig = 0.0, ratio = 0.0;
  for (const auto& base : {make_params(1, 3, 2), make_params(1, 2, 3)}) {
    for (int m = 1; m <= 6; ++m) {
      const TandemParams p = finite(base.lambda, base.mu1, base.mu2, m);
      const QbdBlocks b = build_blocks(p, m);
      const HittingLadder h = solve_H(b, opts.tol);
      const RSolution rs = solve_R(b, opts.tol);
      std::size_t zh = 0, zr = 0;
      const auto nh = nonzero_part(eigen_spectrum(h.h_star), b.phase_count, zh);
      const auto nr = nonzero_part(eigen_spectrum(rs.r), b.phase_count, zr);
      eig = std::max(eig, zh == zr ? spectrum_distance(nh, nr)
                                   : std::numeric_limits<double>::infinity());
      const HittingDecay d = hitting_decay_estimate(p, b, 0, 0, 200);
      ratio = std::max(ratio, std::abs(d.ratio_estimate - compute_zhat(p, m)));
    }
  }
  r.measurements.push_back(measure(
      "max distance of nonzero spectra H_m vs R_m, equal zero counts, m<=6", eig, "<", kEigenTol));
  r.measurements.push_back(
      measure("max |ratio estimate at K=200 - zhat_{m+1}|, m<=6", ratio, "<", kRatioTol));

  // Surrogates of the infinite waiting room: phase caps 40 and 80.
  auto limit_at_cap = [&](const TandemParams& base, int cap) {
    const QbdBlocks b = build_blocks(base, cap);
    return spectral_radius(solve_H(b, opts.tol).h_star);
  };
  double est123_80 = 0.0;
  for (const auto& p : {make_params(1, 2, 3), make_params(1, 3, 2)}) {
    const bool first = regime_of(p) == Regime::FirstBottleneck;
    const double target = first ? compute_eta(p) : p.rho2();
    const double e40 = limit_at_cap(p, 40), e80 = limit_at_cap(p, 80);
    if (first) est123_80 = e80;
    const HittingDecay d80 = hitting_decay_estimate(p, build_blocks(p, 80), 0, 0, 200);
    r.measurements.push_back(measure(pstr(p) + ": |ratio estimate K=200, cap 80 - sp(H_80)|",
                                     std::abs(d80.ratio_estimate - e80), "<", kRatioTol, false));
    const std::string tag = pstr(p) + " toward " + (first ? "eta" : "rho2");
    r.measurements.push_back(measure(tag + ": gap(80) - gap(40)",
                                     std::abs(e80 - target) - std::abs(e40 - target), "<", 0.0));
    r.measurements.push_back(
        measure(pstr(p) + ": cap-doubling drift |est(80) - est(40)|", std::abs(e80 - e40), "<",
                kDriftTol));
  }
  // Richardson step assuming an O(1/P^2) approach; reported only.
  {
    const TandemParams p = make_params(1, 2, 3);
    const double e20 = limit_at_cap(p, 20), e40 = limit_at_cap(p, 40), e80 = limit_at_cap(p, 80);
    const double x40 = (std::pow(41.0, 2) * e40 - std::pow(21.0, 2) * e20) /
                       (std::pow(41.0, 2) - std::pow(21.0, 2));
    const double x80 = (std::pow(81.0, 2) * e80 - std::pow(41.0, 2) * e40) /
                       (std::pow(81.0, 2) - std::pow(41.0, 2));
    r.measurements.push_back(measure("(1,2,3): drift of 1/P^2-extrapolated limits 40 -> 80",
                                     std::abs(x80 - x40), "<", kDriftTol, false));
    r.measurements.push_back(measure("(1,2,3): |extrapolated limit at 80 - eta|",
                                     std::abs(x80 - compute_eta(p)), "<", kDriftTol, false));
  }
  r.measurements.push_back(measure("(1,2,3): |hitting decay(cap 80) - rho2|",
                                   std::abs(est123_80 - 1.0 / 3.0), ">", 10 * kDriftTol));
  r.note = "surrogate limits approach eta at rate O(1/P^2) for (1,2,3)";
  return r;
}

double phat_chi_identity_error(double lambda, double mu1, double mu2, double z, int n) {
  using Big = boost::multiprecision::cpp_bin_float_100;
  if (n < 1) throw InvalidArgument("the identity holds for n >= 1");
  const TandemParams p = make_params(lambda, mu1, mu2);
  const PolyFamily f = make_family(p, z, PolyKind::Phat);
  const Big bz = z, bl = lambda, bm2 = mu2;
  const Big x = (bl / bz - bm2) * (Big(1) - bz);
  const Big got = eval_poly_as<Big>(f, n, x);
  const Big want = (Big(1) - bz) * boost::multiprecision::pow(Big(lambda) / Big(mu1), n);
  return static_cast<double>(boost::multiprecision::abs(got / want - Big(1)));
}

namespace {

using Big = boost::multiprecision::cpp_bin_float_100;

int sign(const Big& v) { return (v > 0) - (v < 0); }

// Zero of degree n near the double estimate x, refined by bisection in
// 100-digit arithmetic.  The double estimate only has to isolate it.
Big refine_zero(const PolyFamily& f, int n, double x) {
  const double h = 1e-10 * (1.0 + std::abs(x));
  Big lo = x - h, hi = x + h;
  const int slo = sign(eval_poly_as<Big>(f, n, lo));
  if (slo == sign(eval_poly_as<Big>(f, n, hi)))
    throw ConvergenceError("zero estimate does not isolate a sign change");
  for (int it = 0; it < 200; ++it) {
    const Big mid = (lo + hi) / 2;
    if (sign(eval_poly_as<Big>(f, n, mid)) == slo) lo = mid;
    else hi = mid;
  }
  return (lo + hi) / 2;
}

// Strict a < b for zeros a of (fa, na) and b of (fb, nb).  Decided in double
// unless the two estimates are too close to tell apart.
bool zero_less(const PolyFamily& fa, int na, double a, const PolyFamily& fb, int nb, double b,
               long& refined) {
  const double sep = 1e-9 * (1.0 + std::abs(a) + std::abs(b));
  if (b - a > sep) return true;
  if (a - b > sep) return false;
  ++refined;
  return refine_zero(fa, na, a) < refine_zero(fb, nb, b);
}

}  // namespace

CriterionResult criterion_orthopoly(const ValidationOptions& opts) {
  CriterionResult r{8, "orthogonal polynomial properties", {}, {}};
  std::mt19937_64 gen(opts.seed ^ 0x5eed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  long violations = 0, refined = 0;
  for (int c = 0; c < 50; ++c) {
    const double lam = 0.2 + 0.8 * uni(gen);
    const TandemParams p =
        make_params(lam, lam * (0.5 + 3.0 * uni(gen)), lam * (0.5 + 3.0 * uni(gen)));
    const double z = 0.05 + 0.9 * uni(gen);
    const int n = 2 + static_cast<int>(uni(gen) * 49);  // 2..50
    const PolyFamily fp = make_family(p, z, PolyKind::P);
    const PolyFamily fh = make_family(p, z, PolyKind::Phat);
    const auto xn = zeros(fp, n).zeros, xm = zeros(fp, n - 1).zeros, xh = zeros(fh, n).zeros;
    auto less = [&](const PolyFamily& fa, int na, double a, const PolyFamily& fb, int nb,
                    double b) { return zero_less(fa, na, a, fb, nb, b, refined); };
    for (int i = 0; i + 1 < n; ++i) {
      if (!less(fp, n, xn[i], fp, n - 1, xm[i]) || !less(fp, n - 1, xm[i], fp, n, xn[i + 1]))
        ++violations;
      if (!less(fp, n, xn[i], fh, n, xh[i]) || !less(fh, n, xh[i], fp, n, xn[i + 1]))
        ++violations;
    }
    if (!less(fp, n, xn[n - 1], fh, n, xh[n - 1])) ++violations;
  }
  r.measurements.push_back(measure("interlacing violations over 50 cases", violations, "==", 0));
  r.measurements.push_back(measure("zero pairs resolved in 100-digit arithmetic", refined, ">=",
                                   0, false));

  double worst = 0.0;
  for (const auto& p : {make_params(1, 3, 2), make_params(1, 2, 3), make_params(0.5, 2, 1.5)}) {
    for (int i = 1; i <= 10; ++i) {
      const double z = p.rho1() + (1.0 - p.rho1()) * i / 11.0;
      for (int n = 1; n <= 60; ++n)
        worst = std::max(worst, phat_chi_identity_error(p.lambda, p.mu1, p.mu2, z, n));
    }
  }
  r.measurements.push_back(
      measure("max rel error Phat_n(chi(z)) vs (1-z) rho1^n, n<=60", worst, "<", kIdentityRel));
  return r;
}

CriterionResult criterion_simulation(const ValidationOptions& opts) {
  CriterionResult r{9, "simulation cross-check of P_1^3", {}, {}};
  const QbdBlocks b = build_blocks(finite(1, 3, 2, 1), 1);
  const Eigen::MatrixXd exact = exit_probabilities(b, 1, 3);
  double worst_z = 0.0;
  long zero_hits = 0;
  bool reproducible = true;
  for (int i = 0; i < b.phase_count; ++i) {
    const HittingEstimate e = simulate_hitting(b, 1, i, 3, opts.replications, opts.seed);
    const HittingEstimate again =
        simulate_hitting(b, 1, i, 3, opts.replications, opts.seed, 3);
    reproducible = reproducible && e.counts == again.counts;
    for (int j = 0; j < b.phase_count; ++j) {
      if (exact(i, j) == 0.0) {
        zero_hits += e.counts[j];
        continue;
      }
      const double se = std::sqrt(exact(i, j) * (1 - exact(i, j)) / opts.replications);
      worst_z = std::max(worst_z, std::abs(e.probability[j] - exact(i, j)) / se);
    }
  }
  r.measurements.push_back(
      measure("max |estimate - exact| in standard errors", worst_z, "<=", kSigmaBand));
  r.measurements.push_back(measure("hits in structurally impossible phases", zero_hits, "==", 0));
  r.measurements.push_back(
      measure("counts identical across 1 and 3 worker threads", reproducible, "==", 1));
  return r;
}

std::vector<CriterionResult> run_acceptance(const ValidationOptions& opts) {
  using Fn = CriterionResult (*)(const ValidationOptions&);
  const Fn all[] = {criterion_product_form,         criterion_r_zhat_bridge,
                    criterion_zhat_regimes,         criterion_invariant_closed_forms,
                    criterion_classification,       criterion_decay_control,
                    criterion_hitting,              criterion_orthopoly,
                    criterion_simulation};
  std::vector<CriterionResult> out;
  for (int i = 0; i < 9; ++i) {
    if (!opts.only.empty() && !opts.only.count(i + 1)) continue;
    try {
      out.push_back(all[i](opts));
    } catch (const std::exception& e) {
      CriterionResult failed{i + 1, "criterion " + std::to_string(i + 1), {}, {}};
      failed.measurements.push_back(measure("completed without error", 0, "==", 1));
      failed.note = e.what();
      out.push_back(failed);
    }
  }
  return out;
}

}  // namespace tandem
