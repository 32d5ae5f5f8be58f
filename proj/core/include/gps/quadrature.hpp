#ifndef GPS_QUADRATURE_HPP
#define GPS_QUADRATURE_HPP

#include <functional>

namespace gps {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_depth = 48;
};

/// Adaptive Gauss-Kronrod 15(7) integration of f on the finite interval [a, b].
/// Subdivides while the embedded error estimate exceeds both tolerances.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

/// Integral of f on [a, +inf) via the substitution x = a + v/(1-v), v in [0,1).
double integrate_to_inf(const std::function<double(double)>& f, double a,
                        const QuadratureOptions& opts = {});

}  // namespace gps

#endif
