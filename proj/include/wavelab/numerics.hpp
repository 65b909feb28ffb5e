#pragma once

#include <functional>

namespace wavelab {

// Adaptive Simpson quadrature on [a, b]. `tol` is applied per panel with the
// usual 15x Richardson safety factor; overall accuracy is tol relative to the
// accumulated integral when rel is true, absolute otherwise.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 48);

} // namespace wavelab
