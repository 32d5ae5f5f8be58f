#ifndef GPS_DISTRIBUTION_HPP
#define GPS_DISTRIBUTION_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gps/gompertz.hpp"
#include "gps/power_series.hpp"

namespace gps {

/// Parameters of the compound lifetime law with cdf 1 - C(theta*tail)/C(theta).
///
/// With extended_gg set (geometric family only) the usual (0,1) constraint on
/// theta is replaced by theta < 1; writing theta* = 1 - theta > 0 gives the
/// extended Gompertz-geometric density, which reduces to plain Gompertz at
/// theta* = 1.
struct GpsParams {
    double beta;
    double gamma;
    double theta;
    PowerSeriesFamily family;
    bool extended_gg = false;

    GompertzParams base() const { return {beta, gamma}; }
    double theta_star() const { return 1.0 - theta; }
    bool degenerate() const;  // C(theta) = a*theta: the plain Gompertz case
    void validate() const;    // throws std::domain_error
};

double cdf(const GpsParams& p, double x);
double pdf(const GpsParams& p, double x);
double log_pdf(const GpsParams& p, double x);
double survival(const GpsParams& p, double x);
double hazard(const GpsParams& p, double x);

/// x_q with cdf(x_q) = q; q = 0 maps to 0, q -> 1 diverges.
double quantile(const GpsParams& p, double q);

/// Inverse-transform draws from a deterministic seeded generator.
std::vector<double> sample(const GpsParams& p, std::size_t count, std::uint64_t seed);

/// Tab-separated rows "x pdf cdf survival hazard", one per grid point.
void emit_curve(const GpsParams& p, const std::vector<double>& grid, std::ostream& os);
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

}  // namespace gps

#endif
