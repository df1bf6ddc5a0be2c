#pragma once

#include <cmath>

namespace ergodens {

/// Value with first and second derivative.
struct D2 {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// C-infinity transition s(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)}),
/// extended by 0 for t <= 0 and 1 for t >= 1. All derivatives vanish at the
/// endpoints, so piecewise definitions glue smoothly.
inline D2 smooth_transition(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  // s = 1/(1+e^q) with q = 1/t - 1/(1-t); stable for t near the endpoints.
  const double q = 1.0 / t - 1.0 / (1.0 - t);
  if (q > 700.0) return {0.0, 0.0, 0.0};
  if (q < -700.0) return {1.0, 0.0, 0.0};
  const double e = std::exp(q);
  const double s = 1.0 / (1.0 + e);
  const double t2 = t * t;
  const double u2 = (1.0 - t) * (1.0 - t);
  const double qp = -1.0 / t2 - 1.0 / u2;
  const double qpp = 2.0 / (t2 * t) - 2.0 / (u2 * (1.0 - t));
  const double s1ms = s * (1.0 - s);
  const double d1 = -qp * s1ms;
  const double d2 = -qpp * s1ms + qp * qp * s1ms * (1.0 - 2.0 * s);
  return {s, d1, d2};
}

/// psi(u) = u * s(2u-1): identically 0 on [0,1/2], equal to u on [1,inf),
/// smooth and nondecreasing in between. Radial tail profile of the
/// exponential test densities; exp(-psi) is their smooth cutoff.
inline D2 tail_ramp(double u) {
  if (u <= 0.5) return {0.0, 0.0, 0.0};
  if (u >= 1.0) return {u, 1.0, 0.0};
  const D2 s = smooth_transition(2.0 * u - 1.0);
  D2 r;
  r.v = u * s.v;
  r.d1 = s.v + 2.0 * u * s.d1;
  r.d2 = 4.0 * s.d1 + 4.0 * u * s.d2;
  return r;
}

/// f(u) = exp(-psi(u)) for u >= 0: equal to 1 on [0,1/2], e^{-u} on [1,inf),
/// monotone C-infinity in between.
inline D2 exp_cutoff(double u) {
  const D2 p = tail_ramp(u);
  const double f = std::exp(-p.v);
  D2 r;
  r.v = f;
  r.d1 = -p.d1 * f;
  r.d2 = (p.d1 * p.d1 - p.d2) * f;
  return r;
}

/// Smooth ramp phi with phi = 0 on [0,1/4] and phi = 1 on [1/2,inf).
inline double annulus_ramp(double t) { return smooth_transition(4.0 * t - 1.0).v; }

inline double annulus_ramp_d1(double t) {
  return 4.0 * smooth_transition(4.0 * t - 1.0).d1;
}

}  // namespace ergodens
