#include "gps/quadrature.hpp"

#include <cmath>

namespace gps {

namespace {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
    double integral;
    double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double fsum = f(c - x) + f(c + x);
        kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    kronrod *= h;
    gauss *= h;
    return {kronrod, std::abs(kronrod - gauss)};
}

double adapt(const std::function<double(double)>& f, double a, double b,
             const Panel& p, const QuadratureOptions& opts, int depth) {
    if (depth >= opts.max_depth) return p.integral;
    if (p.error <= opts.abs_tol || p.error <= opts.rel_tol * std::abs(p.integral))
        return p.integral;
    const double c = 0.5 * (a + b);
    const Panel left = gk15(f, a, c);
    const Panel right = gk15(f, c, b);
    QuadratureOptions half = opts;
    half.abs_tol = 0.5 * opts.abs_tol;
    return adapt(f, a, c, left, half, depth + 1) +
           adapt(f, c, b, right, half, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
    if (!(b > a)) return 0.0;
    return adapt(f, a, b, gk15(f, a, b), opts, 0);
}

double integrate_to_inf(const std::function<double(double)>& f, double a,
                        const QuadratureOptions& opts) {
    auto g = [&](double v) {
        const double om = 1.0 - v;
        const double x = a + v / om;
        return f(x) / (om * om);
    };
    // stop just short of v=1; the Kronrod nodes never touch the endpoints
    return integrate(g, 0.0, 1.0, opts);
}

}  // namespace gps
