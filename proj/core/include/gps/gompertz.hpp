#ifndef GPS_GOMPERTZ_HPP
#define GPS_GOMPERTZ_HPP

#include <cmath>
#include <stdexcept>

namespace gps {

struct GompertzParams {
    double beta;   // scale, > 0
    double gamma;  // shape, > 0

    void validate() const {
        if (!(beta > 0.0) || !(gamma > 0.0))
            throw std::domain_error("Gompertz: beta and gamma must be > 0");
    }
};

/// (e^{gamma x} - 1)/gamma, with a series branch below gamma = 1e-8 so the
/// gamma -> 0+ exponential limit is a continuous code path.
inline double gompertz_exponent(double gamma, double x) {
    if (gamma < 1e-8) {
        const double gx = gamma * x;
        return x * (1.0 + gx * (0.5 + gx / 6.0));
    }
    return std::expm1(gamma * x) / gamma;
}

/// 1 - G(x) = exp(-beta (e^{gamma x}-1)/gamma)
inline double gompertz_tail(const GompertzParams& p, double x) {
    if (x <= 0.0) return 1.0;
    return std::exp(-p.beta * gompertz_exponent(p.gamma, x));
}

inline double gompertz_log_tail(const GompertzParams& p, double x) {
    if (x <= 0.0) return 0.0;
    return -p.beta * gompertz_exponent(p.gamma, x);
}

inline double gompertz_cdf(const GompertzParams& p, double x) {
    return x <= 0.0 ? 0.0 : -std::expm1(gompertz_log_tail(p, x));
}

inline double gompertz_pdf(const GompertzParams& p, double x) {
    if (x < 0.0) return 0.0;
    return p.beta * std::exp(p.gamma * x + gompertz_log_tail(p, x));
}

inline double gompertz_hazard(const GompertzParams& p, double x) {
    return p.beta * std::exp(p.gamma * x);
}

/// G^{-1}(y) = (1/gamma) log(1 - (gamma/beta) log(1-y)); accepts log(1-y)
/// directly so callers can stay in log space for y near 1.
inline double gompertz_quantile_from_log_tail(const GompertzParams& p, double log_tail) {
    return std::log1p(-(p.gamma / p.beta) * log_tail) / p.gamma;
}

inline double gompertz_quantile(const GompertzParams& p, double y) {
    if (y < 0.0 || y >= 1.0) throw std::domain_error("gompertz_quantile: y in [0,1)");
    return gompertz_quantile_from_log_tail(p, std::log1p(-y));
}

}  // namespace gps

#endif
