#include "gps/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gps/special_functions.hpp"

namespace gps {

double ks_statistic(const std::vector<double>& values,
                    const std::function<double(double)>& cdf) {
    if (values.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double F = cdf(sorted[i]);
        d = std::max(d, (i + 1.0) / n - F);
        d = std::max(d, F - static_cast<double>(i) / n);
    }
    return d;
}

std::pair<double, double> ks_test(const GpsParams& params, const ObservedSample& data) {
    data.validate();
    params.validate();
    const double d = ks_statistic(data.values, [&](double x) { return cdf(params, x); });
    const double p = kolmogorov_tail(std::sqrt(static_cast<double>(data.values.size())) * d);
    return {d, p};
}

InformationCriteria information_criteria(double loglik, int k, int n) {
    InformationCriteria ic{};
    ic.aic = -2.0 * loglik + 2.0 * k;
    ic.bic = -2.0 * loglik + k * std::log(static_cast<double>(n));
    ic.aicc_available = n > k + 1;
    ic.aicc = ic.aicc_available
                  ? ic.aic + 2.0 * k * (k + 1.0) / (n - k - 1.0)
                  : std::numeric_limits<double>::quiet_NaN();
    return ic;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
    if (sorted_.empty()) throw std::invalid_argument("EmpiricalCdf: empty sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

GofReport evaluate_gof(const GpsParams& params, const ObservedSample& data, int k,
                       double loglik) {
    GofReport r;
    const auto [d, p] = ks_test(params, data);
    r.ks_stat = d;
    r.ks_pvalue = p;
    r.loglik = loglik;
    r.k = k;
    r.n = static_cast<int>(data.values.size());
    const InformationCriteria ic = information_criteria(loglik, k, r.n);
    r.aic = ic.aic;
    r.aicc = ic.aicc;
    r.aicc_available = ic.aicc_available;
    r.bic = ic.bic;
    return r;
}

}  // namespace gps
