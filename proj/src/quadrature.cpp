#include "uporo/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace uporo {

namespace {

// 15-point Kronrod nodes/weights on [-1,1] and the embedded 7-point Gauss
// weights, symmetric half listed.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
  double kronrod;
  double err;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    if (i == 7) {
      const double fc = f(c);
      resk += kWgk[7] * fc;
      resg += kWg[3] * fc;
      break;
    }
    const double fv = f(c - h * kXgk[i]) + f(c + h * kXgk[i]);
    resk += kWgk[i] * fv;
    if (i % 2 == 1) resg += kWg[i / 2] * fv;
  }
  PanelResult r;
  r.kronrod = resk * h;
  r.err = std::abs((resk - resg) * h);
  return r;
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double tol, int depth) {
  const PanelResult r = gk15(f, a, b);
  // Roundoff floor: once the estimate is at evaluation-noise scale relative
  // to the panel value, further splitting only amplifies noise.
  if (r.err <= tol || r.err <= 1e-14 * std::abs(r.kronrod) || depth <= 0)
    return r.kronrod;
  const double c = 0.5 * (a + b);
  return adapt(f, a, c, 0.5 * tol, depth - 1) +
         adapt(f, c, b, 0.5 * tol, depth - 1);
}

}  // namespace

double gk15_panel(const std::function<double(double)>& f, double a, double b) {
  return gk15(f, a, b).kronrod;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  if (!(abs_tol > 0)) throw std::invalid_argument("integrate: abs_tol must be > 0");
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double width = hi - lo;
  double acc = 0.0;
  if ((lo == 0.0 || hi == 0.0) && width > 256.0) {
    // Intervals anchored at zero and spanning many scales: octave panels
    // toward the zero end, so mass concentrated near the origin is not lost
    // between the nodes of one giant panel. 128 octaves resolve from 1e30
    // down past 1e-9.
    constexpr int kOctaves = 128;
    const double sign = (hi == 0.0) ? -1.0 : 1.0;  // direction away from 0
    double outer = width;
    for (int k = 0; k < kOctaves; ++k) {
      const double inner = (k + 1 == kOctaves) ? 0.0 : outer * 0.5;
      const double pa = sign * outer, pb = sign * inner;
      acc += adapt(f, std::min(pa, pb), std::max(pa, pb),
                   abs_tol / kOctaves, max_depth);
      outer = inner;
    }
  } else {
    // Modest intervals: a fixed initial split so narrow features away from
    // panel nodes are not missed by a single top-level error estimate.
    constexpr int kInitial = 8;
    const double h = width / kInitial;
    for (int i = 0; i < kInitial; ++i)
      acc += adapt(f, lo + i * h, lo + (i + 1) * h, abs_tol / kInitial,
                   max_depth);
  }
  return a < b ? acc : -acc;
}

}  // namespace uporo
