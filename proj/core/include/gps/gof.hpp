#ifndef GPS_GOF_HPP
#define GPS_GOF_HPP

#include <functional>
#include <utility>
#include <vector>

#include "gps/distribution.hpp"
#include "gps/estimation.hpp"

namespace gps {

struct GofReport {
    double ks_stat = 0.0;
    double ks_pvalue = 0.0;
    double aic = 0.0;
    double aicc = 0.0;  // NaN when n <= k+1
    bool aicc_available = true;
    double bic = 0.0;
    double loglik = 0.0;
    int k = 0;
    int n = 0;
};

/// D_n evaluated exactly at the order statistics, p-value from the asymptotic
/// Kolmogorov law.
std::pair<double, double> ks_test(const GpsParams& params, const ObservedSample& data);

/// Same statistic against an arbitrary cdf (used by the probability-integral
/// invariance test and the simulation harness).
double ks_statistic(const std::vector<double>& values,
                    const std::function<double(double)>& cdf);

struct InformationCriteria {
    double aic;
    double aicc;
    bool aicc_available;
    double bic;
};
InformationCriteria information_criteria(double loglik, int k, int n);

/// Right-continuous empirical cdf; evaluable at any x.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> values);
    double operator()(double x) const;
    const std::vector<double>& sorted() const { return sorted_; }

private:
    std::vector<double> sorted_;
};

GofReport evaluate_gof(const GpsParams& params, const ObservedSample& data, int k,
                       double loglik);

}  // namespace gps

#endif
