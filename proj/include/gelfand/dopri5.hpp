#pragma once

// Dormand-Prince 5(4) with Hairer's 4th-order continuous extension. Every
// accepted step keeps its interpolation coefficients so trajectories can be
// evaluated anywhere after the fact.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

namespace gelfand {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> rc{};

  double t1() const { return t0 + h; }
  bool contains(double t) const { return h > 0 ? (t >= t0 && t <= t0 + h) : (t <= t0 && t >= t0 + h); }

  Vec<N> operator()(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = rc[0][i] + s * (rc[1][i] + s1 * (rc[2][i] + s * (rc[3][i] + s1 * rc[4][i])));
    }
    return y;
  }
};

enum class StepStatus { Reached, Event, Stopped, MaxSteps, StepUnderflow };

template <std::size_t N>
struct IntegrationResult {
  std::vector<DenseStep<N>> steps;
  double t = 0.0;
  Vec<N> y{};
  StepStatus status = StepStatus::Reached;
  std::size_t rejected = 0;
};

template <std::size_t N>
struct Dopri5Options {
  double h_init = 0.0;  // 0 picks |t_end - t0| * 1e-3
  double h_max = std::numeric_limits<double>::infinity();
  double h_min = 0.0;   // relative to |t|, see below
  std::size_t max_steps = 200000;
  // Componentwise error scale from the states at both ends of a trial step.
  std::function<Vec<N>(const Vec<N>&, const Vec<N>&)> scale;
  // Scalar event function; a sign change inside a step ends the integration.
  std::function<double(double, const Vec<N>&)> event;
  // Checked after each accepted step; returning true stops the integration.
  std::function<bool(double, const Vec<N>&)> stop;
};

namespace detail {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

template <std::size_t N>
bool all_finite(const Vec<N>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 towards t_end (either direction).
template <std::size_t N, class Rhs>
IntegrationResult<N> dopri5(Rhs&& rhs, double t0, const Vec<N>& y0, double t_end, const Dopri5Options<N>& opt) {
  using namespace detail;
  IntegrationResult<N> out;
  out.t = t0;
  out.y = y0;
  if (t_end == t0) return out;

  const double dir = t_end > t0 ? 1.0 : -1.0;
  double h = opt.h_init > 0.0 ? opt.h_init : std::abs(t_end - t0) * 1e-3;
  h = std::min(h, opt.h_max);

  double t = t0;
  Vec<N> y = y0;
  Vec<N> k1, k2, k3, k4, k5, k6, k7, ys, ynew;
  rhs(t, y, k1);

  double ev_prev = opt.event ? opt.event(t, y) : 0.0;
  double err_prev = 1e-4;
  bool last_rejected = false;

  auto stage = [&](double tt, auto&& combine, Vec<N>& k) {
    for (std::size_t i = 0; i < N; ++i) ys[i] = combine(i);
    rhs(tt, ys, k);
  };

  for (std::size_t n = 0;; ++n) {
    if (n >= opt.max_steps) {
      out.status = StepStatus::MaxSteps;
      break;
    }
    const double h_floor = std::max(opt.h_min, 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)));
    if (h < h_floor) {
      out.status = StepStatus::StepUnderflow;
      break;
    }
    bool final_step = false;
    if ((t + dir * h - t_end) * dir >= 0.0) {
      h = std::abs(t_end - t);
      final_step = true;
    }
    const double hs = dir * h;

    stage(t + c2 * hs, [&](std::size_t i) { return y[i] + hs * a21 * k1[i]; }, k2);
    stage(t + c3 * hs, [&](std::size_t i) { return y[i] + hs * (a31 * k1[i] + a32 * k2[i]); }, k3);
    stage(t + c4 * hs, [&](std::size_t i) { return y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]); }, k4);
    stage(t + c5 * hs,
          [&](std::size_t i) { return y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]); }, k5);
    stage(t + hs,
          [&](std::size_t i) {
            return y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
          },
          k6);
    for (std::size_t i = 0; i < N; ++i) {
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    const double t_new = final_step ? t_end : t + hs;
    rhs(t_new, ynew, k7);

    double err = std::numeric_limits<double>::infinity();
    if (all_finite(ynew) && all_finite(k7) && all_finite(k6) && all_finite(k5)) {
      const Vec<N> sc = opt.scale(y, ynew);
      double acc = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double r = e / sc[i];
        acc += r * r;
      }
      err = std::sqrt(acc / N);
      if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    }

    if (err > 1.0) {
      ++out.rejected;
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.1;
      h *= last_rejected ? std::min(fac, 0.5) : fac;
      last_rejected = true;
      continue;
    }

    DenseStep<N> ds;
    ds.t0 = t;
    ds.h = t_new - t;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = ynew[i] - y[i];
      const double bspl = ds.h * k1[i] - ydiff;
      ds.rc[0][i] = y[i];
      ds.rc[1][i] = ydiff;
      ds.rc[2][i] = bspl;
      ds.rc[3][i] = ydiff - ds.h * k7[i] - bspl;
      ds.rc[4][i] = ds.h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }

    if (opt.event) {
      const double ev_new = opt.event(t_new, ynew);
      if (ev_new == 0.0 || (ev_prev != 0.0 && std::signbit(ev_new) != std::signbit(ev_prev))) {
        double t_hit = t_new;
        if (ev_new != 0.0) {
          auto g = [&](double tt) { return opt.event(tt, ds(tt)); };
          double lo = t, hi = t_new;
          double glo = ev_prev, ghi = ev_new;
          if (lo > hi) {
            std::swap(lo, hi);
            std::swap(glo, ghi);
          }
          std::uintmax_t iters = 100;
          const auto br = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                            boost::math::tools::eps_tolerance<double>(50), iters);
          t_hit = 0.5 * (br.first + br.second);
        }
        // The stored step keeps its full length; the trajectory ends at out.t.
        const Vec<N> y_hit = ds(t_hit);
        out.steps.push_back(ds);
        out.t = t_hit;
        out.y = y_hit;
        out.status = StepStatus::Event;
        return out;
      }
      ev_prev = ev_new;
    }

    out.steps.push_back(ds);
    t = t_new;
    y = ynew;
    k1 = k7;
    out.t = t;
    out.y = y;
    last_rejected = false;

    if (opt.stop && opt.stop(t, y)) {
      out.status = StepStatus::Stopped;
      return out;
    }
    if (final_step) {
      out.status = StepStatus::Reached;
      return out;
    }

    // PI step-size control.
    const double e = std::max(err, 1e-10);
    double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
    fac = std::clamp(fac, 0.2, 10.0);
    err_prev = std::max(err, 1e-4);
    h = std::min(h * fac, opt.h_max);
  }
  return out;
}

/// Locates the step holding t by bisection on an ordered step list.
template <std::size_t N>
const DenseStep<N>* find_step(const std::vector<DenseStep<N>>& steps, double t) {
  if (steps.empty()) return nullptr;
  const bool forward = steps.front().h > 0;
  auto it = std::lower_bound(steps.begin(), steps.end(), t, [forward](const DenseStep<N>& s, double v) {
    return forward ? s.t1() < v : s.t1() > v;
  });
  if (it == steps.end()) return nullptr;
  if (!it->contains(t)) return nullptr;
  return &*it;
}

}  // namespace gelfand
