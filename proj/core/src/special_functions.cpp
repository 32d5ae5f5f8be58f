#include "gps/special_functions.hpp"

#include <cmath>
#include <stdexcept>

#include "gps/quadrature.hpp"

namespace gps {

namespace {

void require_positive_z(double z) {
    if (!(z > 0.0)) throw std::domain_error("integro-exponential: z must be > 0");
}

// Both integrals are computed after u = 1 + v/z, which pulls out the e^{-z}
// factor and leaves int_0^inf e^{-v} k(v) dv with k slowly varying. The
// integrand decays like e^{-v}, so a cutoff with e^{-V} below 1e-18 of the
// accumulated mass bounds the tail; polynomial growth of k is absorbed by
// extending the cutoff.
double laplace_kernel(const std::function<double(double)>& k, double z) {
    QuadratureOptions opts;
    opts.abs_tol = 1e-12;
    opts.rel_tol = 1e-12;
    double total = 0.0;
    double lo = 0.0;
    for (double hi = 45.0; hi <= 45.0 * 64; hi *= 2.0) {
        total += integrate([&](double v) { return std::exp(-v) * k(v); }, lo, hi, opts);
        const double tail_k = std::abs(k(hi));
        if (std::exp(-hi) * std::max(tail_k, 1.0) < 1e-16) break;
        lo = hi;
    }
    (void)z;
    return total;
}

}  // namespace

double integro_exponential_scaled(double f, double z) {
    require_positive_z(z);
    // e^z W_f(z) = (1/z) int_0^inf e^{-v} (1+v/z)^{-f} dv
    return laplace_kernel([&](double v) { return std::pow(1.0 + v / z, -f); }, z) / z;
}

double integro_exponential(double f, double z) {
    require_positive_z(z);
    return std::exp(-z) * integro_exponential_scaled(f, z);
}

double gen_integro_exponential_scaled(int r, double z) {
    require_positive_z(z);
    if (r < 1) throw std::domain_error("gen_integro_exponential: r must be >= 1");
    // e^z W_1^{r-1}(z) =
    //   (1/((r-1)! z)) int_0^inf ln(1+v/z)^{r-1} e^{-v} (1+v/z)^{-1} dv
    const double inv_fact = 1.0 / std::tgamma(static_cast<double>(r));
    const double value = laplace_kernel(
        [&](double v) {
            const double w = 1.0 + v / z;
            return std::pow(std::log1p(v / z), r - 1) / w;
        },
        z);
    return inv_fact * value / z;
}

double gen_integro_exponential(int r, double z) {
    return std::exp(-z) * gen_integro_exponential_scaled(r, z);
}

double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("normal_quantile: p in (0,1)");
    // Acklam coefficients
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // one Halley polish against the erfc-based cdf
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double kolmogorov_tail(double t) {
    if (t <= 0.0) return 1.0;
    double sum = 0.0;
    for (int j = 1; j < 1000; ++j) {
        const double term = std::exp(-2.0 * j * j * t * t);
        sum += (j % 2 == 1) ? term : -term;
        if (term < 1e-12) break;
    }
    const double p = 2.0 * sum;
    return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

}  // namespace gps
