#pragma once

// C^1 compactly supported scalar primitives used to build curvature and twist
// profiles: a squared-cosine bump and a plateau with squared-cosine ramps.
// Values, first/second derivatives and antiderivatives are closed-form, so
// profile sup-norms and total twist can be computed without quadrature.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "twistlab/errors.hpp"

namespace twistlab {

struct Bump {
  enum class Kind { cos2, plateau };
  Kind kind = Kind::cos2;
  double center = 0.0;
  double half_width = 0.0;  // support is [center - half_width, center + half_width]
  double amplitude = 0.0;
  double ramp = 0.0;  // plateau only: ramp length at each end, 0 < ramp <= half_width
};

inline void validate(const Bump& b) {
  if (!(b.half_width > 0.0)) throw InvalidProfileError("bump: half_width must be positive");
  if (b.kind == Bump::Kind::plateau && !(b.ramp > 0.0 && b.ramp <= b.half_width))
    throw InvalidProfileError("bump: plateau ramp must satisfy 0 < ramp <= half_width");
}

inline double bump_value(const Bump& b, double s) {
  const double pi = std::numbers::pi;
  const double v = s - b.center;
  if (std::abs(v) >= b.half_width) return 0.0;
  if (b.kind == Bump::Kind::cos2) {
    const double x = pi * v / (2.0 * b.half_width);
    const double c = std::cos(x);
    return b.amplitude * c * c;
  }
  const double flat = b.half_width - b.ramp;
  const double av = std::abs(v);
  if (av <= flat) return b.amplitude;
  const double x = pi * (av - flat) / (2.0 * b.ramp);
  const double c = std::cos(x);
  return b.amplitude * c * c;
}

inline double bump_derivative(const Bump& b, double s) {
  const double pi = std::numbers::pi;
  const double v = s - b.center;
  if (std::abs(v) >= b.half_width) return 0.0;
  if (b.kind == Bump::Kind::cos2) {
    // d/ds A cos^2(pi v / 2w) = -A (pi/2w) sin(pi v / w)
    return -b.amplitude * (pi / (2.0 * b.half_width)) * std::sin(pi * v / b.half_width);
  }
  const double flat = b.half_width - b.ramp;
  const double av = std::abs(v);
  if (av <= flat) return 0.0;
  const double mag = -b.amplitude * (pi / (2.0 * b.ramp)) * std::sin(pi * (av - flat) / b.ramp);
  return v > 0.0 ? mag : -mag;
}

inline double bump_second_derivative(const Bump& b, double s) {
  const double pi = std::numbers::pi;
  const double v = s - b.center;
  if (std::abs(v) >= b.half_width) return 0.0;
  if (b.kind == Bump::Kind::cos2) {
    const double w = b.half_width;
    return -b.amplitude * (pi * pi / (2.0 * w * w)) * std::cos(pi * v / w);
  }
  const double flat = b.half_width - b.ramp;
  const double av = std::abs(v);
  if (av <= flat) return 0.0;
  return -b.amplitude * (pi * pi / (2.0 * b.ramp * b.ramp)) * std::cos(pi * (av - flat) / b.ramp);
}

// Integral over (-inf, s].  Total mass: A*w for cos2, A*(2w - r) for plateau.
inline double bump_antiderivative(const Bump& b, double s) {
  const double pi = std::numbers::pi;
  const double v = s - b.center;
  if (v <= -b.half_width) return 0.0;
  if (b.kind == Bump::Kind::cos2) {
    if (v >= b.half_width) return b.amplitude * b.half_width;
    const double w = b.half_width;
    return b.amplitude * (0.5 * (v + w) + (w / (2.0 * pi)) * std::sin(pi * v / w));
  }
  const double w = b.half_width, r = b.ramp, flat = w - r;
  const double total = b.amplitude * (2.0 * w - r);
  if (v >= w) return total;
  auto ramp_partial = [&](double u) {
    // integral of A cos^2(pi x / 2r) for x from -r to u, u in [-r, 0]; rising ramp
    return b.amplitude * (0.5 * (u + r) + (r / (2.0 * pi)) * std::sin(pi * u / r));
  };
  if (v <= -flat) return ramp_partial(v + flat);
  const double left = b.amplitude * r / 2.0;
  if (v <= flat) return left + b.amplitude * (v + flat);
  // falling ramp: A cos^2(pi (v-flat) / 2r)
  const double u = v - flat;
  return left + b.amplitude * 2.0 * flat +
         b.amplitude * (0.5 * u + (r / (2.0 * pi)) * std::sin(pi * u / r));
}

inline double eval(const std::vector<Bump>& bumps, double s) {
  double y = 0.0;
  for (const auto& b : bumps) y += bump_value(b, s);
  return y;
}

inline double eval_derivative(const std::vector<Bump>& bumps, double s) {
  double y = 0.0;
  for (const auto& b : bumps) y += bump_derivative(b, s);
  return y;
}

inline double eval_second_derivative(const std::vector<Bump>& bumps, double s) {
  double y = 0.0;
  for (const auto& b : bumps) y += bump_second_derivative(b, s);
  return y;
}

inline double eval_antiderivative(const std::vector<Bump>& bumps, double s) {
  double y = 0.0;
  for (const auto& b : bumps) y += bump_antiderivative(b, s);
  return y;
}

// Hull [lo, hi] of the union of supports; empty list gives [0, 0].
inline std::pair<double, double> support_hull(const std::vector<Bump>& bumps) {
  if (bumps.empty()) return {0.0, 0.0};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& b : bumps) {
    lo = std::min(lo, b.center - b.half_width);
    hi = std::max(hi, b.center + b.half_width);
  }
  return {lo, hi};
}

namespace detail {

// Sup of |f| over the hull by dense scanning plus per-bump landmark points.
// Landmarks make single-bump sup-norms exact (centers, plateau shoulders).
template <class F>
double scan_sup(const std::vector<Bump>& bumps, F&& f) {
  if (bumps.empty()) return 0.0;
  auto [lo, hi] = support_hull(bumps);
  std::vector<double> pts;
  const int n = 8192;
  pts.reserve(n + 8 * bumps.size() + 1);
  for (int i = 0; i <= n; ++i) pts.push_back(lo + (hi - lo) * i / n);
  for (const auto& b : bumps) {
    const double flat = b.half_width - (b.kind == Bump::Kind::plateau ? b.ramp : b.half_width);
    for (double p : {b.center, b.center - b.half_width, b.center + b.half_width,
                     b.center - flat, b.center + flat,
                     b.center - 0.5 * (flat + b.half_width), b.center + 0.5 * (flat + b.half_width)})
      if (p >= lo && p <= hi) pts.push_back(p);
  }
  double sup = 0.0;
  for (double p : pts) sup = std::max(sup, std::abs(f(p)));
  return sup;
}

}  // namespace detail

inline double sup_abs(const std::vector<Bump>& bumps) {
  return detail::scan_sup(bumps, [&](double s) { return eval(bumps, s); });
}

inline double sup_abs_derivative(const std::vector<Bump>& bumps) {
  return detail::scan_sup(bumps, [&](double s) { return eval_derivative(bumps, s); });
}

inline double sup_abs_second_derivative(const std::vector<Bump>& bumps) {
  return detail::scan_sup(bumps, [&](double s) { return eval_second_derivative(bumps, s); });
}

}  // namespace twistlab
