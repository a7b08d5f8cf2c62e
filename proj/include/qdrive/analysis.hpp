#pragma once

// Parameter scans, minimum-time searches, robustness studies, speed-limit
// reference values and coupling-resource curves.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qdrive/core.hpp"
#include "qdrive/engine.hpp"
#include "qdrive/errors.hpp"
#include "qdrive/parallel.hpp"
#include "qdrive/protocols.hpp"

namespace qdrive {

enum class ScanParameter { Alpha, Delta, EtaSq, Duration, DtRel, OmegaAxis };

inline const char* to_string(ScanParameter p) {
  switch (p) {
    case ScanParameter::Alpha: return "alpha";
    case ScanParameter::Delta: return "delta";
    case ScanParameter::EtaSq: return "eta_sq";
    case ScanParameter::Duration: return "duration";
    case ScanParameter::DtRel: return "dT_rel";
    case ScanParameter::OmegaAxis: return "omega_axis";
  }
  return "?";
}

struct ScanRecord {
  ScanParameter parameter = ScanParameter::Duration;
  double value = 0.0;
  double duration = 0.0;
  double final_fidelity = 0.0;
};

/// Builds a schedule for a requested duration T.
using ScheduleFactory = std::function<ControlSchedule(double)>;

struct ScanOptions {
  IntegratorConfig integrator{};
  int jobs = 1;
};

// ---------------------------------------------------------------------------
// Duration scans

/// One evolution per duration; records follow the order of `durations`.
inline std::vector<ScanRecord> fidelity_vs_duration(const ScheduleFactory& family, const std::vector<double>& durations,
                                                    const ScanOptions& opts = {}) {
  if (durations.empty()) throw InvalidArgument("fidelity_vs_duration: empty duration grid");
  for (double t : durations) detail::require_positive(t, "T", "fidelity_vs_duration");
  std::vector<ScanRecord> out(durations.size());
  parallel_for(durations.size(), opts.jobs, [&](std::size_t i) {
    const double t = durations[i];
    try {
      out[i] = {ScanParameter::Duration, t, t, final_fidelity(family(t), opts.integrator)};
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (T = " + detail::fmt(t) + ")", e.tau());
    }
  });
  return out;
}

/// Uniform grid lo, lo + step, ..., up to and including hi.
inline std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw InvalidArgument("uniform_grid: need step > 0 and hi >= lo");
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  if (hi - g.back() > 1e-9 * std::max(1.0, std::abs(hi))) g.push_back(hi);
  return g;
}

inline std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) throw InvalidArgument("log_grid: need 0 < lo < hi and >= 2 points");
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
  g.back() = hi;
  return g;
}

struct MinDurationSearch {
  double t_min = 0.05;
  double t_max = 40.0;
  double resolution = 0.05;
  double tolerance = 1e-3;
};

/// Earliest T on an evaluated grid where F_fin reaches `target`, refined by
/// bisection between the last grid point below and the first point above.
/// Returns nullopt when no grid point reaches the target.
inline std::optional<double> first_crossing(const ScheduleFactory& family, double target,
                                            const std::vector<ScanRecord>& grid, double tolerance,
                                            const IntegratorConfig& cfg) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].final_fidelity < target) continue;
    if (i == 0) return grid[0].duration;
    double lo = grid[i - 1].duration;
    double hi = grid[i].duration;
    while (hi - lo > tolerance) {
      const double mid = 0.5 * (lo + hi);
      if (final_fidelity(family(mid), cfg) >= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }
  return std::nullopt;
}

/// Smallest T in [t_min, t_max] with F_fin(T) >= target (first threshold crossing).
inline double min_duration_for_fidelity(const ScheduleFactory& family, double target,
                                        const MinDurationSearch& search = {}, const ScanOptions& opts = {}) {
  if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("min_duration_for_fidelity: target must lie in (0, 1)");
  detail::require_positive(search.t_min, "t_min", "min_duration_for_fidelity");
  if (!(search.t_max > search.t_min)) throw InvalidArgument("min_duration_for_fidelity: t_max must exceed t_min");
  const auto records = fidelity_vs_duration(family, uniform_grid(search.t_min, search.t_max, search.resolution), opts);
  if (auto t = first_crossing(family, target, records, search.tolerance, opts.integrator)) return *t;
  const auto best = std::max_element(records.begin(), records.end(), [](const ScanRecord& a, const ScanRecord& b) {
    return a.final_fidelity < b.final_fidelity;
  });
  throw TargetUnreachedError("fidelity target " + detail::fmt(target) + " not reached for T in [" +
                                 detail::fmt(search.t_min) + ", " + detail::fmt(search.t_max) +
                                 "]; best F_fin = " + detail::fmt(best->final_fidelity) + " at T = " +
                                 detail::fmt(best->duration),
                             best->final_fidelity, best->duration);
}

// ---------------------------------------------------------------------------
// Speed limit

/// T = 2 t0 + arccos|<psi_g(+gamma0)|psi_g(-gamma0)>| / omega.
inline double qsl_time(double omega, double gamma0 = kGamma0, double t0 = 0.0) {
  detail::require_positive(omega, "omega", "qsl_time");
  if (!(t0 >= 0.0)) throw InvalidArgument("qsl_time: t0 must be >= 0");
  return 2.0 * t0 + rabi_segment_duration(omega, gamma0);
}

/// Duration of a resonant pi pulse, pi/omega.
inline double t_pi(double omega) {
  detail::require_positive(omega, "omega", "t_pi");
  return std::numbers::pi / omega;
}

// ---------------------------------------------------------------------------
// Roland-Cerf eta scan

struct EtaScanResult {
  std::vector<double> eta_sq;
  /// Row-major: one block of T-grid records per eta^2.
  std::vector<ScanRecord> surface;
  std::vector<std::optional<double>> t_target;
};

inline EtaScanResult eta_scan(const std::vector<double>& eta_sq_list, double omega, const std::vector<double>& durations,
                              double target = 0.9, const ScanOptions& opts = {}, double tolerance = 1e-3) {
  for (double e2 : eta_sq_list) {
    if (!(e2 > 0.0 && e2 < 0.25)) throw InvalidArgument("eta_scan: eta^2 = " + detail::fmt(e2) + " outside (0, 0.25)");
  }
  EtaScanResult res;
  res.eta_sq = eta_sq_list;
  for (double e2 : eta_sq_list) {
    const double eta = std::sqrt(e2);
    ScheduleFactory f = [eta, omega](double t) { return rc_eta(eta, omega, t); };
    auto rows = fidelity_vs_duration(f, durations, opts);
    for (auto& r : rows) {
      r.parameter = ScanParameter::EtaSq;
      r.value = e2;
    }
    res.t_target.push_back(first_crossing(f, target, rows, tolerance, opts.integrator));
    res.surface.insert(res.surface.end(), rows.begin(), rows.end());
  }
  return res;
}

// ---------------------------------------------------------------------------
// Duration mismatch for superadiabatic protocols

enum class SuperadiabaticKind { Linear, Tangent };

/// Schedule designed for `t_design` but executed over t_design (1 + dT_rel).
inline std::vector<ScanRecord> duration_mismatch_scan(double omega, double t_design, const std::vector<double>& dt_rel_grid,
                                                      bool with_omega_correction,
                                                      SuperadiabaticKind kind = SuperadiabaticKind::Tangent,
                                                      const ScanOptions& opts = {}) {
  SuperadiabaticOptions sa;
  sa.omega_correction = with_omega_correction;
  const ControlSchedule designed = kind == SuperadiabaticKind::Tangent ? superadiabatic_tangent(omega, t_design, sa)
                                                                        : superadiabatic_linear(omega, t_design, sa);
  for (double d : dt_rel_grid) {
    if (!(t_design * (1.0 + d) > 0.0)) {
      throw InvalidArgument("duration_mismatch_scan: executed duration " + detail::fmt(t_design * (1.0 + d)) +
                            " is not positive (dT_rel = " + detail::fmt(d) + ")");
    }
  }
  std::vector<ScanRecord> out(dt_rel_grid.size());
  parallel_for(dt_rel_grid.size(), opts.jobs, [&](std::size_t i) {
    const double t = t_design * (1.0 + dt_rel_grid[i]);
    out[i] = {ScanParameter::DtRel, dt_rel_grid[i], t, final_fidelity(with_duration(designed, t), opts.integrator)};
  });
  return out;
}

// ---------------------------------------------------------------------------
// Coupling resources

namespace detail {

template <class F>
double integrate_unit_interval(F f, const std::vector<double>& breakpoints) {
  std::vector<double> edges{0.0};
  for (double b : breakpoints) {
    if (b > 0.0 && b < 1.0) edges.push_back(b);
  }
  edges.push_back(1.0);
  std::sort(edges.begin(), edges.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, edges[i], edges[i + 1], 15, 1e-11, &err);
  }
  return total;
}

}  // namespace detail

/// <omega> = integral of omega'(tau) over [0, 1].
inline double average_coupling(const ControlSchedule& schedule) {
  return detail::integrate_unit_interval([&](double tau) { return schedule.omega(tau); }, schedule.breakpoints);
}

/// max over tau of omega'(tau): dense scan refined by golden-section search.
inline double peak_coupling(const ControlSchedule& schedule) {
  constexpr int n = 2001;
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double v = schedule.omega(static_cast<double>(i) / (n - 1));
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = std::max(0.0, static_cast<double>(best - 1) / (n - 1));
  double b = std::min(1.0, static_cast<double>(best + 1) / (n - 1));
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = schedule.omega(c);
  double fd = schedule.omega(d);
  while (b - a > 1e-12) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = schedule.omega(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = schedule.omega(d);
    }
  }
  return std::max({best_v, fc, fd});
}

enum class ResourceFamily { LandauZener, SuperadiabaticLinear, SuperadiabaticTangent };
enum class CouplingAxis { Initial, Peak, Average };

inline const char* to_string(ResourceFamily f) {
  switch (f) {
    case ResourceFamily::LandauZener: return "linear-lz";
    case ResourceFamily::SuperadiabaticLinear: return "superadiabatic-linear";
    case ResourceFamily::SuperadiabaticTangent: return "superadiabatic-tangent";
  }
  return "?";
}

inline const char* to_string(CouplingAxis a) {
  switch (a) {
    case CouplingAxis::Initial: return "initial";
    case CouplingAxis::Peak: return "peak";
    case CouplingAxis::Average: return "average";
  }
  return "?";
}

struct ResourcePoint {
  double coupling_axis_value = 0.0;
  double min_duration = 0.0;
  std::string protocol_label;
};

struct ResourceOptions {
  /// Fidelity target of the Landau-Zener reference curve.
  double lz_target = 0.98;
  /// Relative tolerance of the golden-section search over the base coupling.
  double golden_tolerance = 1e-4;
  /// Relative tolerance of the duration bisection.
  double duration_tolerance = 1e-6;
  /// Check by simulation that the optimal superadiabatic schedule reaches F_fin = 1.
  bool verify_superadiabatic = true;
  double verify_tolerance = 1e-6;
  /// Average axis of superadiabatic families: report <omega'> of the schedule
  /// whose base coupling minimizes the peak, instead of minimizing <omega'>.
  bool average_at_peak_optimum = true;
  ScanOptions scan{};
};

inline ControlSchedule superadiabatic_schedule(ResourceFamily family, double omega, double duration) {
  return family == ResourceFamily::SuperadiabaticLinear ? superadiabatic_linear(omega, duration)
                                                        : superadiabatic_tangent(omega, duration);
}

inline double coupling_axis_value(const ControlSchedule& s, CouplingAxis axis) {
  switch (axis) {
    case CouplingAxis::Initial: return s.omega(0.0);
    case CouplingAxis::Peak: return peak_coupling(s);
    case CouplingAxis::Average: return average_coupling(s);
  }
  return 0.0;
}

struct OptimalCoupling {
  double base_omega;
  double axis_value;
};

/// Golden-section search over log(omega) for the base coupling that minimizes
/// the chosen axis value of a superadiabatic schedule of duration T.
inline OptimalCoupling minimal_superadiabatic_coupling(ResourceFamily family, CouplingAxis axis, double duration,
                                                       double rel_tol = 1e-4) {
  auto f = [&](double log_w) { return coupling_axis_value(superadiabatic_schedule(family, std::exp(log_w), duration), axis); };
  // The optimum scales like T^-1/2 (linear) or T^-2 (tangent); bracket generously.
  double a = std::log(1e-6);
  double b = std::log(1e3);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  // Coarse bracketing first, the objective is unimodal but very flat at the edges.
  constexpr int coarse = 64;
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= coarse; ++i) {
    const double v = f(a + (b - a) * i / coarse);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  const double h = (b - a) / coarse;
  const double lo0 = a + h * std::max(0, best - 1);
  const double hi0 = a + h * std::min(coarse, best + 1);
  a = lo0;
  b = hi0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > rel_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double x = fc < fd ? c : d;
  return {std::exp(x), std::min(fc, fd)};
}

/// One (coupling, T) point per grid value: the shortest duration at which the
/// protocol family reaches its target with the given coupling resource.
/// Landau-Zener: first T with F_fin >= lz_target at constant omega.
/// Superadiabatic: F_fin = 1 for every T; the smallest T whose optimized
/// axis value does not exceed the grid value.
inline std::vector<ResourcePoint> resource_curves(ResourceFamily family, CouplingAxis axis,
                                                  const std::vector<double>& grid, const ResourceOptions& opts = {}) {
  if (grid.empty()) throw InvalidArgument("resource_curves: empty coupling grid");
  for (double v : grid) detail::require_positive(v, "coupling", "resource_curves");
  if (family != ResourceFamily::LandauZener && axis == CouplingAxis::Initial) {
    throw InvalidArgument("resource_curves: the initial coupling of a superadiabatic schedule can be made arbitrarily small; "
                          "use the peak or average axis");
  }
  std::vector<ResourcePoint> out(grid.size());
  const std::string label = std::string(to_string(family)) + "/" + to_string(axis);

  if (family == ResourceFamily::LandauZener) {
    ScanOptions inner = opts.scan;
    inner.jobs = 1;
    parallel_for(grid.size(), opts.scan.jobs, [&](std::size_t i) {
      const double w = grid[i];
      // Asymptotic estimate from 1 - F = exp(-pi w^2 T / 4) sets the search window.
      const double t_est = 4.0 * std::log(1.0 / (1.0 - opts.lz_target)) / (std::numbers::pi * w * w);
      MinDurationSearch search;
      search.resolution = std::max(0.05, 0.01 * t_est);
      search.t_min = search.resolution;
      search.t_max = 3.0 * t_est + 10.0;
      search.tolerance = std::max(1e-3, 1e-5 * t_est);
      const double t = min_duration_for_fidelity([w](double d) { return linear_lz(w, d); }, opts.lz_target, search, inner);
      out[i] = {w, t, label};
    });
    return out;
  }

  parallel_for(grid.size(), opts.scan.jobs, [&](std::size_t i) {
    const double target = grid[i];
    auto best_at = [&](double t) {
      if (axis == CouplingAxis::Average && opts.average_at_peak_optimum) {
        const OptimalCoupling oc = minimal_superadiabatic_coupling(family, CouplingAxis::Peak, t, opts.golden_tolerance);
        return OptimalCoupling{oc.base_omega, average_coupling(superadiabatic_schedule(family, oc.base_omega, t))};
      }
      return minimal_superadiabatic_coupling(family, axis, t, opts.golden_tolerance);
    };
    double lo = 1e-3;
    double hi = 1.0;
    while (best_at(hi).axis_value > target) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e7) {
        throw InvalidArgument("resource_curves: coupling " + detail::fmt(target) + " not reachable by " + label);
      }
    }
    if (best_at(lo).axis_value <= target) {
      throw InvalidArgument("resource_curves: coupling " + detail::fmt(target) + " is above the search bracket for " + label);
    }
    while ((hi - lo) > opts.duration_tolerance * hi) {
      const double mid = 0.5 * (lo + hi);
      if (best_at(mid).axis_value <= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    if (opts.verify_superadiabatic) {
      const OptimalCoupling oc = best_at(hi);
      const double f = final_fidelity(superadiabatic_schedule(family, oc.base_omega, hi), opts.scan.integrator);
      if (!(1.0 - f < opts.verify_tolerance)) {
        throw NumericalError("resource_curves: " + label + " at T = " + detail::fmt(hi) +
                                 " does not reach F_fin = 1 (F_fin = " + detail::fmt(f) + ")",
                             1.0);
      }
    }
    out[i] = {target, hi, label};
  });
  return out;
}

// ---------------------------------------------------------------------------
// Sweep geometry

struct CrossingResult {
  int count = 0;
  std::vector<double> roots;
};

/// Sign changes of Gamma(tau) on a dense grid, each refined by bisection.
inline CrossingResult crossing_count(const ControlSchedule& schedule, int grid_points = 100000) {
  if (grid_points < 2) throw InvalidArgument("crossing_count: need at least 2 grid points");
  CrossingResult res;
  double prev_tau = 0.0;
  double prev = schedule.gamma(0.0);
  for (int i = 1; i < grid_points; ++i) {
    const double tau = static_cast<double>(i) / (grid_points - 1);
    const double v = schedule.gamma(tau);
    if (v == 0.0) continue;
    if (prev != 0.0 && std::signbit(v) != std::signbit(prev)) {
      double lo = prev_tau;
      double hi = tau;
      for (int k = 0; k < 80 && hi - lo > 1e-15; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double m = schedule.gamma(mid);
        if (m == 0.0) {
          lo = hi = mid;
          break;
        }
        if (std::signbit(m) == std::signbit(prev)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      res.roots.push_back(0.5 * (lo + hi));
      ++res.count;
    }
    prev = v;
    prev_tau = tau;
  }
  return res;
}

/// Half-width in tau of the region |Gamma| <= C of a power-law sweep: (C/2)^(1/alpha).
inline double low_speed_width(double alpha, double c) {
  if (!(alpha >= 1.0)) throw InvalidArgument("low_speed_width: alpha must be >= 1");
  if (!(c > 0.0 && c < 2.0)) throw InvalidArgument("low_speed_width: C must lie in (0, 2)");
  return std::pow(0.5 * c, 1.0 / alpha);
}

/// sup |Gamma_a - Gamma_b| / gamma0 over tau in [lo, hi].
inline double sweep_distance(const ControlSchedule& a, const ControlSchedule& b, double lo = 0.05, double hi = 0.95,
                             int points = 2001, double gamma0 = kGamma0) {
  double d = 0.0;
  for (int i = 0; i < points; ++i) {
    const double tau = lo + (hi - lo) * i / (points - 1);
    d = std::max(d, std::abs(a.gamma(tau) - b.gamma(tau)) / gamma0);
  }
  return d;
}

/// Number of strict interior local maxima of the fidelity column.
inline int count_local_maxima(const std::vector<ScanRecord>& rows) {
  int n = 0;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    if (rows[i].final_fidelity > rows[i - 1].final_fidelity && rows[i].final_fidelity > rows[i + 1].final_fidelity) ++n;
  }
  return n;
}

}  // namespace qdrive
