#ifndef GPS_MOMENTS_HPP
#define GPS_MOMENTS_HPP

#include <functional>

#include "gps/distribution.hpp"

namespace gps {

/// Truncation tail for every series over the latent count N.
inline constexpr double kPmfTailEps = 1e-12;

/// Walk n -> pmf_N(n) until the accumulated mass exceeds 1 - kPmfTailEps.
void for_each_pmf(const PowerSeriesFamily& family, double theta,
                  const std::function<void(int, double)>& visit);

struct MomentResult {
    double value;
    bool quadrature_fallback;  // series path unusable, integrated x^r f instead
};

/// E[X^r] via the count mixture: sum_n pmf(n) (r!/gamma^r) e^z W_1^{r-1}(z),
/// z = n beta / gamma, with the e^z factor kept inside the scaled kernel so
/// nothing overflows. Falls back to quadrature when the series is unusable
/// (extended-GG parameters or non-finite terms).
MomentResult moment_detail(const GpsParams& p, int r);
double moment(const GpsParams& p, int r);

/// Moment generating function, series form; domain t < gamma.
double mgf(const GpsParams& p, double t);

/// Small-beta approximation of the Gompertz(n beta, gamma) mean.
double mean_small_beta_approx(int n, double beta, double gamma);

double order_stat_pdf(const GpsParams& p, int n, int i, double x);
double order_stat_cdf(const GpsParams& p, int n, int i, double x);
double order_stat_moment(const GpsParams& p, int n, int i, int r);

/// Differential entropy by quadrature of -f log f (primary path).
double shannon_entropy(const GpsParams& p);
/// Closed-form decomposition with M_X evaluated at gamma - 1e-6; cross-check.
double shannon_entropy_series(const GpsParams& p);

/// m(t) = E[X - t | X > t], as int_t^inf S / S(t) (primary path).
double mean_residual_life(const GpsParams& p, double t);
/// The count-mixture form of m(t); cross-check.
double mean_residual_life_series(const GpsParams& p, double t);

/// Integration cutoff used for [0, inf) integrals against the density.
double upper_support(const GpsParams& p);

}  // namespace gps

#endif
