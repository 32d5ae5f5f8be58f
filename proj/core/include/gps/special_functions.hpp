#ifndef GPS_SPECIAL_FUNCTIONS_HPP
#define GPS_SPECIAL_FUNCTIONS_HPP

namespace gps {

/// W_f(z) = int_1^inf e^{-zu} u^{-f} du, z > 0. W_0(z) = e^{-z}/z and
/// W_1(z) is the exponential integral E_1(z).
double integro_exponential(double f, double z);

/// e^z W_f(z); stays representable where e^z alone would overflow.
double integro_exponential_scaled(double f, double z);

/// Generalised integro-exponential
/// W_1^{r-1}(z) = (1/(r-1)!) int_1^inf (ln u)^{r-1} e^{-zu} / u du, r >= 1.
double gen_integro_exponential(int r, double z);

/// e^z W_1^{r-1}(z).
double gen_integro_exponential_scaled(int r, double z);

/// Standard normal quantile (Acklam's rational approximation polished by one
/// Halley step; relative error well below 1e-10).
double normal_quantile(double p);

/// P(sup-norm limit > t) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 t^2}, the
/// asymptotic Kolmogorov tail; series truncated below 1e-12.
double kolmogorov_tail(double t);

}  // namespace gps

#endif
