#include "gps/power_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEdge = 1e-12;  // exclusive margin at the domain endpoints

double log_expm1(double x) {
    // log(e^x - 1), stable for large x
    return x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

}  // namespace

PowerSeriesFamily::PowerSeriesFamily(FamilyKind kind, std::string name, double sup,
                                     int m, std::vector<Term> terms)
    : kind_(kind), name_(std::move(name)), theta_sup_(sup), m_(m),
      terms_(std::move(terms)) {
    if (!terms_.empty()) {
        std::sort(terms_.begin(), terms_.end());
        min_power_ = terms_.front().first;
    }
}

PowerSeriesFamily PowerSeriesFamily::geometric() {
    return {FamilyKind::geometric, "geometric", 1.0, 0, {}};
}

PowerSeriesFamily PowerSeriesFamily::poisson() {
    return {FamilyKind::poisson, "poisson", kInf, 0, {}};
}

PowerSeriesFamily PowerSeriesFamily::binomial(int m) {
    if (m < 1) throw std::invalid_argument("binomial family: m must be >= 1");
    return {FamilyKind::binomial, "binomial(" + std::to_string(m) + ")", kInf, m, {}};
}

PowerSeriesFamily PowerSeriesFamily::logarithmic() {
    return {FamilyKind::logarithmic, "logarithmic", 1.0, 0, {}};
}

PowerSeriesFamily PowerSeriesFamily::polynomial(std::vector<Term> terms) {
    if (terms.empty())
        throw std::invalid_argument("polynomial family: needs at least one term");
    for (const auto& [n, a] : terms) {
        if (n < 1) throw std::invalid_argument("polynomial family: powers must be >= 1");
        if (!(a > 0.0)) throw std::invalid_argument("polynomial family: coefficients must be > 0");
    }
    return {FamilyKind::polynomial, "polynomial", kInf, 0, std::move(terms)};
}

PowerSeriesFamily PowerSeriesFamily::parse(const std::string& spec) {
    if (spec == "geometric") return geometric();
    if (spec == "poisson") return poisson();
    if (spec == "logarithmic") return logarithmic();
    if (spec == "binomial") return binomial(1);
    if (spec.rfind("binomial(", 0) == 0 && spec.back() == ')') {
        const std::string inner = spec.substr(9, spec.size() - 10);
        size_t pos = 0;
        const int m = std::stoi(inner, &pos);
        if (pos != inner.size()) throw std::invalid_argument("bad binomial spec: " + spec);
        return binomial(m);
    }
    // "n1:a1,n2:a2,..."
    std::vector<Term> terms;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("bad polynomial term '" + item + "' in: " + spec);
        terms.emplace_back(std::stoi(item.substr(0, colon)),
                           std::stod(item.substr(colon + 1)));
    }
    return polynomial(std::move(terms));
}

bool PowerSeriesFamily::contains(double theta) const {
    if (!std::isfinite(theta)) return false;
    if (theta <= kEdge) return false;
    if (std::isfinite(theta_sup_) && theta >= theta_sup_ - kEdge) return false;
    return true;
}

void PowerSeriesFamily::require_theta(double theta) const {
    if (!contains(theta))
        throw std::domain_error(name_ + ": theta=" + std::to_string(theta) +
                                " outside open domain (0, " +
                                (std::isfinite(theta_sup_) ? std::to_string(theta_sup_) : "inf") + ")");
}

double PowerSeriesFamily::poly_sum(double theta, int order) const {
    double s = 0.0;
    for (const auto& [n, a] : terms_) {
        if (n < order) continue;
        double fac = a;
        for (int k = 0; k < order; ++k) fac *= static_cast<double>(n - k);
        s += fac * std::pow(theta, n - order);
    }
    return s;
}

double PowerSeriesFamily::C(double theta, int order) const {
    require_theta(theta);
    if (order < 0 || order > 3) throw std::domain_error("C: order must be in 0..3");
    switch (kind_) {
        case FamilyKind::geometric: {
            const double om = 1.0 - theta;
            switch (order) {
                case 0: return theta / om;
                case 1: return 1.0 / (om * om);
                case 2: return 2.0 / (om * om * om);
                default: return 6.0 / (om * om * om * om);
            }
        }
        case FamilyKind::poisson:
            return order == 0 ? std::expm1(theta) : std::exp(theta);
        case FamilyKind::binomial: {
            const double md = static_cast<double>(m_);
            if (order == 0) return std::expm1(md * std::log1p(theta));
            double fac = 1.0;
            for (int k = 0; k < order; ++k) fac *= md - k;  // 0 once order > m
            return fac * std::exp((md - order) * std::log1p(theta));
        }
        case FamilyKind::logarithmic: {
            const double om = 1.0 - theta;
            switch (order) {
                case 0: return -std::log1p(-theta);
                case 1: return 1.0 / om;
                case 2: return 1.0 / (om * om);
                default: return 2.0 / (om * om * om);
            }
        }
        case FamilyKind::polynomial:
            return poly_sum(theta, order);
    }
    return 0.0;
}

double PowerSeriesFamily::log_C(double theta) const {
    require_theta(theta);
    switch (kind_) {
        case FamilyKind::geometric:
            return std::log(theta) - std::log1p(-theta);
        case FamilyKind::poisson:
            return log_expm1(theta);
        case FamilyKind::binomial:
            return log_expm1(m_ * std::log1p(theta));
        case FamilyKind::logarithmic:
            return std::log(-std::log1p(-theta));
        case FamilyKind::polynomial: {
            const int c = min_power_;
            double s = 0.0;
            for (const auto& [n, a] : terms_) s += a * std::pow(theta, n - c);
            return c * std::log(theta) + std::log(s);
        }
    }
    return 0.0;
}

double PowerSeriesFamily::log_Cprime(double u) const {
    switch (kind_) {
        case FamilyKind::geometric:
            return -2.0 * std::log1p(-u);
        case FamilyKind::poisson:
            return u;
        case FamilyKind::binomial:
            return std::log(static_cast<double>(m_)) + (m_ - 1) * std::log1p(u);
        case FamilyKind::logarithmic:
            return -std::log1p(-u);
        case FamilyKind::polynomial: {
            const int c = min_power_;
            double s = 0.0;
            for (const auto& [n, a] : terms_) s += n * a * std::pow(u, n - c);
            return (c - 1) * std::log(u) + std::log(s);
        }
    }
    return 0.0;
}

double PowerSeriesFamily::inverse_C(double y) const {
    if (!(y > 0.0)) throw std::domain_error(name_ + ": inverse_C needs y > 0");
    switch (kind_) {
        case FamilyKind::geometric:
            return y / (1.0 + y);
        case FamilyKind::poisson:
            return std::log1p(y);
        case FamilyKind::binomial:
            return std::expm1(std::log1p(y) / m_);
        case FamilyKind::logarithmic:
            return -std::expm1(-y);
        case FamilyKind::polynomial: {
            // bracket [0, hi] with doubling, then bisection
            double hi = 1.0;
            int guard = 0;
            while (poly_sum(hi, 0) < y) {
                hi *= 2.0;
                if (++guard > 2000) throw std::range_error("inverse_C: y unattainable");
            }
            double lo = 0.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (poly_sum(mid, 0) < y ? lo : hi) = mid;
                if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mid))) break;
            }
            return 0.5 * (lo + hi);
        }
    }
    return 0.0;
}

double PowerSeriesFamily::coeff(int n) const {
    if (n < 1) return 0.0;
    switch (kind_) {
        case FamilyKind::geometric: return 1.0;
        case FamilyKind::poisson: return std::exp(-std::lgamma(n + 1.0));
        case FamilyKind::binomial:
            return n > m_ ? 0.0
                          : std::exp(std::lgamma(m_ + 1.0) - std::lgamma(n + 1.0) -
                                     std::lgamma(m_ - n + 1.0));
        case FamilyKind::logarithmic: return 1.0 / n;
        case FamilyKind::polynomial:
            for (const auto& [k, a] : terms_)
                if (k == n) return a;
            return 0.0;
    }
    return 0.0;
}

double PowerSeriesFamily::log_coeff(int n) const {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (n < 1) return neg_inf;
    switch (kind_) {
        case FamilyKind::geometric: return 0.0;
        case FamilyKind::poisson: return -std::lgamma(n + 1.0);
        case FamilyKind::binomial:
            return n > m_ ? neg_inf
                          : std::lgamma(m_ + 1.0) - std::lgamma(n + 1.0) -
                                std::lgamma(m_ - n + 1.0);
        case FamilyKind::logarithmic: return -std::log(static_cast<double>(n));
        case FamilyKind::polynomial: {
            const double a = coeff(n);
            return a > 0.0 ? std::log(a) : neg_inf;
        }
    }
    return neg_inf;
}

double PowerSeriesFamily::pmf(double theta, int n) const {
    require_theta(theta);
    if (n < 1) return 0.0;
    const double la = log_coeff(n);
    if (!std::isfinite(la)) return 0.0;
    return std::exp(la + n * std::log(theta) - log_C(theta));
}

double PowerSeriesFamily::mean_N(double theta) const {
    return 1.0 - theta * D1(theta);
}

double PowerSeriesFamily::A1(double u) const {
    switch (kind_) {
        case FamilyKind::geometric: return 1.0 / (u * (1.0 - u));
        case FamilyKind::poisson: return 1.0 / -std::expm1(-u);
        case FamilyKind::binomial: {
            const double md = static_cast<double>(m_);
            return md * std::exp((md - 1.0) * std::log1p(u)) /
                   std::expm1(md * std::log1p(u));
        }
        case FamilyKind::logarithmic: return -1.0 / ((1.0 - u) * std::log1p(-u));
        case FamilyKind::polynomial: return poly_sum(u, 1) / poly_sum(u, 0);
    }
    return 0.0;
}

double PowerSeriesFamily::A2(double u) const {
    switch (kind_) {
        case FamilyKind::geometric: return 2.0 / (1.0 - u);
        case FamilyKind::poisson: return 1.0;
        case FamilyKind::binomial: return (m_ - 1.0) / (1.0 + u);
        case FamilyKind::logarithmic: return 1.0 / (1.0 - u);
        case FamilyKind::polynomial: return poly_sum(u, 2) / poly_sum(u, 1);
    }
    return 0.0;
}

double PowerSeriesFamily::A3(double u) const {
    switch (kind_) {
        case FamilyKind::geometric: {
            const double om = 1.0 - u;
            return 6.0 / (om * om);
        }
        case FamilyKind::poisson: return 1.0;
        case FamilyKind::binomial: {
            const double op = 1.0 + u;
            return (m_ - 1.0) * (m_ - 2.0) / (op * op);
        }
        case FamilyKind::logarithmic: {
            const double om = 1.0 - u;
            return 2.0 / (om * om);
        }
        case FamilyKind::polynomial: return poly_sum(u, 3) / poly_sum(u, 1);
    }
    return 0.0;
}

double PowerSeriesFamily::D1(double theta) const {
    switch (kind_) {
        case FamilyKind::geometric:
            return -1.0 / (1.0 - theta);
        case FamilyKind::poisson:
            // series head past the removable pole: -1/2 - theta/12 + theta^3/720
            if (std::abs(theta) < 1e-4)
                return -0.5 - theta / 12.0 + theta * theta * theta / 720.0;
            return 1.0 / theta - 1.0 / -std::expm1(-theta);
        case FamilyKind::binomial: {
            const double md = static_cast<double>(m_);
            if (std::abs(theta) * md < 1e-3) {
                const double rho = (md - 1.0) / 2.0;
                const double sig = (md - 1.0) * (md - 2.0) / 6.0;
                const double tau = (md - 1.0) * (md - 2.0) * (md - 3.0) / 24.0;
                return -rho - (2.0 * sig - rho * rho) * theta -
                       (3.0 * tau - 3.0 * rho * sig + rho * rho * rho) * theta * theta;
            }
            return 1.0 / theta - A1(theta);
        }
        case FamilyKind::logarithmic:
            if (std::abs(theta) < 1e-4)
                return -0.5 - (5.0 / 12.0) * theta - 0.375 * theta * theta;
            return 1.0 / theta - A1(theta);
        case FamilyKind::polynomial: {
            // exact rational form: -(sum (n-1) a_n th^{n-2}) / (sum a_n th^{n-1})
            const int c = min_power_;
            if (theta == 0.0)
                return c == 1 ? -coeff(2) / coeff(1)
                              : -std::numeric_limits<double>::infinity();
            double num = 0.0, den = 0.0;
            for (const auto& [n, a] : terms_) {
                if (n > 1) num += (n - 1.0) * a * std::pow(theta, n - c - 1);
                den += a * std::pow(theta, n - c);
            }
            return -num / den;
        }
    }
    return 0.0;
}

double PowerSeriesFamily::D2(double theta) const {
    switch (kind_) {
        case FamilyKind::geometric: {
            const double om = 1.0 - theta;
            return -1.0 / (om * om);
        }
        case FamilyKind::poisson: {
            if (std::abs(theta) < 1e-4) return -1.0 / 12.0 + theta * theta / 240.0;
            const double r = 1.0 / -std::expm1(-theta);
            return -1.0 / (theta * theta) + r * (r - 1.0);
        }
        case FamilyKind::binomial: {
            const double md = static_cast<double>(m_);
            if (std::abs(theta) * md < 1e-3) {
                const double rho = (md - 1.0) / 2.0;
                const double sig = (md - 1.0) * (md - 2.0) / 6.0;
                const double tau = (md - 1.0) * (md - 2.0) * (md - 3.0) / 24.0;
                return (rho * rho - 2.0 * sig) +
                       (6.0 * rho * sig - 6.0 * tau - 2.0 * rho * rho * rho) * theta;
            }
            const double r = A1(theta);
            return -1.0 / (theta * theta) - A2(theta) * r + r * r;
        }
        case FamilyKind::logarithmic: {
            if (std::abs(theta) < 1e-4) return -5.0 / 12.0 - 0.75 * theta;
            const double r = A1(theta);
            return -1.0 / (theta * theta) - A2(theta) * r + r * r;
        }
        case FamilyKind::polynomial: {
            if (theta == 0.0) {
                if (min_power_ != 1) return -std::numeric_limits<double>::infinity();
                const double a1 = coeff(1), a2 = coeff(2), a3 = coeff(3);
                return (a2 * a2 - 2.0 * a1 * a3) / (a1 * a1);
            }
            // numerator of theta^2 C^2 D2 = -C^2 + theta^2 (C'^2 - C'' C),
            // expanded as sum over term pairs with coefficient
            // a_n a_k [ n k - 1 - k (k - 1) ] on theta^{n+k}
            double num = 0.0, den = 0.0;
            const int c = min_power_;
            for (const auto& [n, a] : terms_) {
                for (const auto& [k, b] : terms_) {
                    const double w = static_cast<double>(n) * k - 1.0 -
                                     static_cast<double>(k) * (k - 1.0);
                    num += a * b * w * std::pow(theta, n + k - 2 * c);
                }
                den += a * std::pow(theta, n - c);
            }
            return num / (theta * theta * den * den);
        }
    }
    return 0.0;
}

double PowerSeriesFamily::log_theta_over_C(double theta) const {
    switch (kind_) {
        case FamilyKind::geometric:
            return std::log1p(-theta);
        case FamilyKind::poisson:
            if (theta > 30.0) return std::log(theta) - theta - std::log1p(-std::exp(-theta));
            return -std::log(std::expm1(theta) / theta);
        case FamilyKind::binomial: {
            const double L = m_ * std::log1p(theta);
            if (L > 30.0) return std::log(theta) - L - std::log1p(-std::exp(-L));
            // expm1(L)/theta = (expm1(L)/L) * (L/theta), both factors stable
            return -std::log((std::expm1(L) / L) * (L / theta));
        }
        case FamilyKind::logarithmic:
            return -std::log(-std::log1p(-theta) / theta);
        case FamilyKind::polynomial: {
            const int c = min_power_;
            double s = 0.0;
            for (const auto& [n, a] : terms_) s += a * std::pow(theta, n - c);
            return -(c - 1) * std::log(theta) - std::log(s);
        }
    }
    return 0.0;
}

double PowerSeriesFamily::survival_ratio(double theta, double t) const {
    switch (kind_) {
        case FamilyKind::geometric:
            return t * (1.0 - theta) / (1.0 - theta * t);
        case FamilyKind::poisson:
            return std::expm1(theta * t) / std::expm1(theta);
        case FamilyKind::binomial:
            return std::expm1(m_ * std::log1p(theta * t)) /
                   std::expm1(m_ * std::log1p(theta));
        case FamilyKind::logarithmic:
            return std::log1p(-theta * t) / std::log1p(-theta);
        case FamilyKind::polynomial: {
            const int c = min_power_;
            double num = 0.0, den = 0.0;
            for (const auto& [n, a] : terms_) {
                const double w = a * std::pow(theta, n - c);
                num += w * std::pow(t, n);
                den += w;
            }
            return num / den;
        }
    }
    return 0.0;
}

double PowerSeriesFamily::posterior_var_Z(double u) const {
    const double a2 = A2(u);
    return u * u * (A3(u) - a2 * a2) + u * a2;
}

}  // namespace gps
