#pragma once

// Two-covariate power comparison between the Grace, GraceI and ridge tests.
//
// With unit-scaled x_1, x_2 of correlation rho, penalty [[1, l], [l, 1]] and
// tuning ratio k = h/n, the standardized excess of the Grace statistic is
// governed by
//
//   Upsilon = {[(k+1)^2 - (rho + l k)^2] |b1| - t |k (l - rho)|}
//             / sqrt((1 + 2k)(1 - rho^2) + k^2 (1 + l^2 - 2 l rho))
//
// where t = (log p / n)^(1/2 - xi). GraceI is l = 0; the ridge threshold is
// sqrt(1 - rho^2) |b1|.

#include <cmath>
#include <vector>

#include "grace/core.hpp"

namespace grace {

inline double upsilon(double k, double l, double rho, double beta1_abs, double t) {
  detail::require(k >= 0.0, "upsilon: k must be nonnegative");
  detail::require(std::abs(l) <= 1.0, "upsilon: |l| must not exceed 1");
  const double denom_sq =
      (1.0 + 2.0 * k) * (1.0 - rho * rho) + k * k * (1.0 + l * l - 2.0 * l * rho);
  if (!(denom_sq > 0.0)) throw InvalidArgument("upsilon: nonpositive denominator");
  const double lead = (k + 1.0) * (k + 1.0) - (rho + l * k) * (rho + l * k);
  return (lead * beta1_abs - t * std::abs(k * (l - rho))) / std::sqrt(denom_sq);
}

/// Large-k limit of Upsilon(k, l, rho) / Upsilon(k, 0, rho).
inline double upsilon_ratio_limit(double l, double rho) {
  return (1.0 - l * l) / std::sqrt(1.0 + l * l - 2.0 * l * rho);
}

/// Root in [-1, 1] of l^3 - 3l + 2 rho = 0, by bisection.
inline double grace_vs_gracei_boundary(double rho, double tolerance = 1e-12) {
  detail::require(std::abs(rho) <= 1.0, "grace_vs_gracei_boundary: |rho| must not exceed 1");
  auto f = [rho](double l) { return l * l * l - 3.0 * l + 2.0 * rho; };
  // f is decreasing on [-1, 1] with f(-1) = 2 + 2 rho >= 0 >= f(1) = 2 rho - 2.
  double lo = -1.0, hi = 1.0;
  if (f(lo) == 0.0) return lo;
  if (f(hi) == 0.0) return hi;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

enum class Mark { plus, minus, intermediate };

inline char to_char(Mark m) { return m == Mark::plus ? '+' : m == Mark::minus ? '-' : 'o'; }

struct Figure1Point {
  double l = 0.0;
  double rho = 0.0;
  double value = 0.0;  ///< ratio (panel a) or log-ratio (panel b)
  Mark mark = Mark::intermediate;
};

struct Figure1Grid {
  double k = 10.0;
  double beta1_abs = 1.0;
  double t = 0.25;
  std::vector<Figure1Point> panel_a;
  std::vector<Figure1Point> panel_b;
};

/// Evenly spaced values lo, lo + step, ..., hi (inclusive up to rounding).
inline std::vector<double> grid_values(double lo, double hi, double step) {
  detail::require(step > 0.0 && hi >= lo, "grid_values: bad range");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= count; ++i) {
    double v = std::round((lo + static_cast<double>(i) * step) * 1e10) / 1e10;
    if (v == 0.0) v = 0.0;  // drop negative zero
    out.push_back(v);
  }
  return out;
}

/// Panel (a): Upsilon(k,l,rho)/Upsilon(k,0,rho), marked at 1.02 / 0.98.
/// Panel (b): log[Upsilon(k,l,rho) / (sqrt(1-rho^2)|b1|)], marked at +-0.5.
/// Grid points with |rho| = 1 are skipped.
inline Figure1Grid figure1_grid(double k, double beta1_abs, double t, const std::vector<double>& ls,
                                const std::vector<double>& rhos) {
  Figure1Grid grid{k, beta1_abs, t, {}, {}};
  for (double rho : rhos) {
    if (std::abs(rho) >= 1.0) continue;
    const double gracei = upsilon(k, 0.0, rho, beta1_abs, t);
    const double ridge = std::sqrt(1.0 - rho * rho) * beta1_abs;
    for (double l : ls) {
      const double value = upsilon(k, l, rho, beta1_abs, t);
      Figure1Point a{l, rho, value / gracei, Mark::intermediate};
      a.mark = a.value > 1.02 ? Mark::plus : a.value < 0.98 ? Mark::minus : Mark::intermediate;
      grid.panel_a.push_back(a);

      Figure1Point b{l, rho, value > 0.0 ? std::log(value / ridge) : -HUGE_VAL, Mark::intermediate};
      b.mark = b.value > 0.5 ? Mark::plus : b.value < -0.5 ? Mark::minus : Mark::intermediate;
      grid.panel_b.push_back(b);
    }
  }
  return grid;
}

/// Default grid: l in [-1, 1] and rho in [-0.9, 0.9], step 0.1.
inline Figure1Grid figure1_grid(double k = 10.0, double beta1_abs = 1.0, double t = 0.25) {
  return figure1_grid(k, beta1_abs, t, grid_values(-1.0, 1.0, 0.1), grid_values(-0.9, 0.9, 0.1));
}

}  // namespace grace
