#pragma once

#include <functional>

namespace uporo {

/// Adaptive Gauss-Kronrod (15-point) quadrature of f over [a, b].
/// Subdivides until the Kronrod error estimate of every panel is below
/// abs_tol scaled by panel fraction. Integrands are assumed smooth on the
/// interior of [a, b]; callers split at known kinks.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, int max_depth = 48);

/// Single non-adaptive 15-point Gauss-Kronrod panel over [a, b].
/// Near machine precision for smooth integrands on short intervals.
double gk15_panel(const std::function<double(double)>& f, double a, double b);

}  // namespace uporo
