#pragma once

#include <functional>

#include "bicons/core.hpp"

namespace bicons {

/// Adaptive Simpson quadrature of f over [a, b] (a > b allowed, sign flips).
/// Throws QuadratureFailure when the recursion depth is exhausted before the
/// requested absolute tolerance is met.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-12, int max_depth = 48);

}  // namespace bicons
