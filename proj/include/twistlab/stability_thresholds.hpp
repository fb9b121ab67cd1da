#pragma once

// Explicit smallness thresholds for bend-vs-twist stability.  Starting from
// the weighted Hardy constant c_h of the straight twisted tube, a chain of
// pointwise metric comparisons bounds how strong a compactly supported bend
// (measured by k = sup|kappa1| + sup|kappa1'|, plus sup|kappa2| in the pure
// twist mode) may become before the form q can dip below the threshold E1.
// The ledger records the comparison constants C1..C7; epsilon_threshold
// composes them into one certified bound; bend_sweep measures the actual
// onset of discrete spectrum and checks it stays above the certified value.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "twistlab/curve_geometry.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/hardy_constants.hpp"
#include "twistlab/waveguide_operators.hpp"

namespace twistlab {

// effective_twist: sigma = theta_dot - kappa2, bends measured without kappa2;
// pure_twist: sigma = theta_dot alone, kappa2 counts as part of the
// perturbation strength and must stay below 1/a.
enum class TwistStabilityMode { effective_twist, pure_twist };

struct ThresholdLedger {
  TwistStabilityMode mode = TwistStabilityMode::effective_twist;
  double a = 0.0;
  double coupling_norm = 0.0;  // sup|kappa2 - theta_dot|, or sup|kappa2|
  double twist_norm = 0.0;     // sup|theta_dot|
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0, C5 = 0.0, C6 = 0.0, C7 = 0.0;
  std::string k_definition;
  std::vector<std::string> constraints;
  double epsilon = 0.0;
};

// Metric-comparison constants for a cross-section of radius a.  The
// perturbed and unperturbed inverse metrics differ by at most C1*k, the
// log-density gradient is bounded by C2*k, and the unperturbed metric is
// pinched between C3^{-1} and C3; the rest are the printed combinations.
inline ThresholdLedger constants_ledger(TwistStabilityMode mode, double a,
                                        double coupling_norm, double twist_norm) {
  if (!(a >= 0.0) || !(coupling_norm >= 0.0) || !(twist_norm >= 0.0))
    throw ConfigError("constants_ledger: norms and radius must be nonnegative");
  ThresholdLedger L;
  L.mode = mode;
  L.a = a;
  L.coupling_norm = coupling_norm;
  L.twist_norm = twist_norm;
  if (mode == TwistStabilityMode::effective_twist) {
    const double m = 1.0 + a * coupling_norm;
    L.C1 = 6.0 * a * m * m;
    L.C3 = 1.0 + a * coupling_norm + a * a * coupling_norm * coupling_norm;
    L.k_definition = "k = sup|kappa1| + sup|kappa1'|";
  } else {
    if (a > 0.0 && !(a * coupling_norm < 1.0))
      throw ConfigError(
          "constants_ledger: pure twist mode needs sup|kappa2| < 1/a to keep the "
          "comparison uniform");
    const double m = 1.0 + a * coupling_norm + a * twist_norm;
    L.C1 = 6.0 * a * m * m;
    L.C3 = std::max(2.0, 1.0 + 2.0 * a * a * twist_norm * twist_norm);
    L.k_definition = "k = sup|kappa1| + sup|kappa1'| + sup|kappa2|";
  }
  L.C2 = 1.0 + a * (1.0 + twist_norm);
  L.C4 = 3.0 * L.C1 * L.C3;
  L.C5 = L.C2 * std::sqrt(3.0 * L.C3 * (1.0 + L.C4));
  L.C6 = 1.0 + L.C4;
  L.C7 = 2.0 * L.C5 * L.C5;
  return L;
}

struct EpsilonBranch {
  std::string name;
  double value = 0.0;
};

struct EpsilonThreshold {
  double epsilon = 0.0;
  std::vector<EpsilonBranch> branches;
};

// Composition of the smallness constraints into one bound on k.  The four
// branches: the comparison chain needs k <= 1; the lower density bound needs
// sup|kappa1| <= 1/(2a), transferred to k through the fraction
// kappa1_unit_sup = sup|kappa1| / k of the fixed bump shape; the form
// comparison needs k < 1/C6 (kept off the boundary by a 1e-6 margin); and
// the final integrand c_h(1 - C6 k)/(1 + (s-s0)^2) - (C6 E1 + C7) k on the
// bend support I must stay pointwise nonnegative, which caps k at
// c_h / (C6 c_h + (C6 E1 + C7) max_I (1 + (s-s0)^2)).
inline EpsilonThreshold epsilon_threshold(const ThresholdLedger& led, double c_h,
                                          double E1, const Interval& I, double s0,
                                          double kappa1_unit_sup = 1.0) {
  if (!(c_h > 0.0))
    throw ConfigError("epsilon_threshold: needs a positive Hardy constant");
  if (!(E1 > 0.0)) throw ConfigError("epsilon_threshold: E1 must be positive");
  if (!(I.length() > 0.0))
    throw ConfigError("epsilon_threshold: bend support interval is empty");
  if (!(kappa1_unit_sup > 0.0) || kappa1_unit_sup > 1.0)
    throw ConfigError("epsilon_threshold: kappa1 shape fraction must lie in (0,1]");

  EpsilonThreshold out;
  out.branches.push_back({"comparison chain valid up to k = 1", 1.0});
  if (led.a > 0.0)
    out.branches.push_back({"density lower bound sup|kappa1| <= 1/(2a)",
                            1.0 / (2.0 * led.a * kappa1_unit_sup)});
  out.branches.push_back({"metric pinching needs k < 1/C6", (1.0 - 1e-6) / led.C6});
  const double lo = 1.0 + (I.lo - s0) * (I.lo - s0);
  const double hi = 1.0 + (I.hi - s0) * (I.hi - s0);
  const double weight_max = std::max(lo, hi);
  out.branches.push_back(
      {"pointwise nonnegative integrand on the bend support",
       c_h / (led.C6 * c_h + (led.C6 * E1 + led.C7) * weight_max)});

  out.epsilon = std::numeric_limits<double>::infinity();
  for (const EpsilonBranch& b : out.branches) out.epsilon = std::min(out.epsilon, b.value);
  return out;
}

inline void attach_epsilon(ThresholdLedger& led, const EpsilonThreshold& e) {
  led.epsilon = e.epsilon;
  led.constraints.clear();
  for (const EpsilonBranch& b : e.branches)
    led.constraints.push_back(b.name + ": k <= " + std::to_string(b.value));
}

struct SweepRow {
  double k = 0.0;
  double kappa1_sup = 0.0;
  double dkappa1_sup = 0.0;
  bool solved = false;
  bool below = false;          // any eigenvalue below E1 - gap_tol
  double lowest = 0.0;         // smallest computed eigenvalue
  double gap = 0.0;            // E1 - lowest (positive when below)
  bool injectivity_flag = false;  // embedding check inconclusive at this k
  std::string note;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double k_c = -1.0;        // smallest k with spectrum below E1; -1 if none
  bool onset_monotone = true;
  double epsilon = -1.0;
  bool conservative = true;  // no row with k <= epsilon dips below E1
  double shape_unit_sup = 0.0;   // sup|kappa1| / k for the scaled shape
  double shape_ratio = 0.0;      // sup|kappa1'| / sup|kappa1|
};

struct ShapeNorms {
  double kappa1 = 0.0, dkappa1 = 0.0, kappa2 = 0.0;
  double sum_effective() const { return kappa1 + dkappa1; }
  double sum_pure() const { return kappa1 + dkappa1 + kappa2; }
};

// Sup norms over the profile grid samples and midpoints.
inline ShapeNorms shape_norms(const CurvatureProfile& p) {
  ShapeNorms n;
  auto probe = [&n, &p](double x) {
    n.kappa1 = std::max(n.kappa1, std::abs(p.kappa1_at(x)));
    n.dkappa1 = std::max(n.dkappa1, std::abs(p.dkappa1_at(x)));
    n.kappa2 = std::max(n.kappa2, std::abs(p.kappa2_at(x)));
  };
  for (std::size_t i = 0; i + 1 < p.s.size(); ++i) {
    probe(p.s[i]);
    probe(0.5 * (p.s[i] + p.s[i + 1]));
  }
  if (!p.s.empty()) probe(p.s.back());
  return n;
}

struct BendSweepConfig {
  std::vector<double> k_values;
  int n_eigs = 4;
  double gap_tol = 1e-9;
  double epsilon = -1.0;  // certified threshold to compare against, if any
  TwistStabilityMode mode = TwistStabilityMode::effective_twist;
  EigOptions eig;
};

// Scales the bend shape of `base` so that the mode's perturbation norm
// equals k for each requested k (sup|kappa1| + sup|kappa1'|, with sup|kappa2|
// joining the sum and the scaling in pure twist mode), solves for spectrum
// below E1, and locates the onset.  The remaining twist data is held fixed.
// Rows where the tube stops being embedded are reported unsolved; rows with
// an inconclusive embedding certificate are flagged but still solved.
inline SweepResult bend_sweep(const TubeGrid& g, const CurvatureProfile& base,
                              const BendSweepConfig& cfg) {
  if (base.kappa1.empty())
    throw ConfigError("bend_sweep: base profile has no bend to scale");
  if (cfg.k_values.empty()) throw ConfigError("bend_sweep: no k values");
  for (std::size_t i = 0; i < cfg.k_values.size(); ++i) {
    if (!(cfg.k_values[i] >= 0.0))
      throw ConfigError("bend_sweep: k values must be nonnegative");
    if (i > 0 && !(cfg.k_values[i] > cfg.k_values[i - 1]))
      throw ConfigError("bend_sweep: k values must be strictly increasing");
  }

  const bool pure = cfg.mode == TwistStabilityMode::pure_twist;
  const ShapeNorms n = shape_norms(base);
  const double unit = pure ? n.sum_pure() : n.sum_effective();
  if (!(n.kappa1 > 0.0)) throw ConfigError("bend_sweep: base bend is identically zero");

  SweepResult out;
  out.epsilon = cfg.epsilon;
  out.shape_unit_sup = n.kappa1 / unit;
  out.shape_ratio = n.dkappa1 / n.kappa1;

  for (double k : cfg.k_values) {
    SweepRow row;
    row.k = k;
    const double t = k / unit;
    row.kappa1_sup = t * n.kappa1;
    row.dkappa1_sup = t * n.dkappa1;
    try {
      CurvatureProfile p;
      if (k > 0.0) {
        std::vector<Bump> scaled = base.kappa1;
        for (Bump& b : scaled) b.amplitude *= t;
        std::vector<Bump> k2 = base.kappa2;
        if (pure)
          for (Bump& b : k2) b.amplitude *= t;
        p = make_profile(scaled, k2, base.theta_dot, base.s_a, base.s_b, base.delta_s);
      } else {
        p = make_profile({}, pure ? std::vector<Bump>{} : base.kappa2, base.theta_dot,
                         base.s_a, base.s_b, base.delta_s);
      }
      const SymmetricForm form = assemble_q(g, p);
      row.injectivity_flag = !form.warning.empty();
      if (row.injectivity_flag) row.note = form.warning;
      const SpectralResult res =
          eigenvalues_below_threshold(form, form.E1, cfg.n_eigs, cfg.eig, cfg.gap_tol);
      row.solved = true;
      row.lowest = res.smallest;
      row.below = !res.below.empty();
      row.gap = form.E1 - res.smallest;
    } catch (const ImmersionError& e) {
      row.note = e.what();
    }
    out.rows.push_back(row);
  }

  bool seen_below = false;
  for (const SweepRow& row : out.rows) {
    if (!row.solved) continue;
    if (row.below && out.k_c < 0.0) out.k_c = row.k;
    if (seen_below && !row.below) out.onset_monotone = false;
    seen_below = seen_below || row.below;
    if (cfg.epsilon >= 0.0 && row.k <= cfg.epsilon && row.below) out.conservative = false;
  }
  return out;
}

}  // namespace twistlab
