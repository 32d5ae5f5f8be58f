#include "gps/distribution.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "gps/random.hpp"

namespace gps {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool GpsParams::degenerate() const {
    return family.kind() == FamilyKind::polynomial && family.terms().size() == 1 &&
           family.min_power() == 1;
}

void GpsParams::validate() const {
    base().validate();
    if (extended_gg) {
        if (family.kind() != FamilyKind::geometric)
            throw std::domain_error("extended_gg requires the geometric family");
        if (!(theta < 1.0))
            throw std::domain_error("extended_gg requires theta < 1 (theta* > 0)");
    } else {
        family.require_theta(theta);
    }
}

double survival(const GpsParams& p, double x) {
    if (x <= 0.0) return 1.0;
    const double t = gompertz_tail(p.base(), x);
    return p.family.survival_ratio(p.theta, t);
}

double cdf(const GpsParams& p, double x) {
    if (x <= 0.0) return 0.0;
    return 1.0 - survival(p, x);
}

double log_pdf(const GpsParams& p, double x) {
    if (x < 0.0) return -kInf;
    const double lt = gompertz_log_tail(p.base(), x);
    return std::log(p.beta) + p.gamma * x + lt + p.family.log_Cprime(p.theta * std::exp(lt)) +
           p.family.log_theta_over_C(p.theta);
}

double pdf(const GpsParams& p, double x) {
    if (x < 0.0) return 0.0;
    return std::exp(log_pdf(p, x));
}

double hazard(const GpsParams& p, double x) {
    if (x < 0.0) return 0.0;
    const double t = gompertz_tail(p.base(), x);
    const double u = p.theta * t;
    // h = theta beta e^{gamma x} t C'(u)/C(u) = beta e^{gamma x} M(u)
    // with M(u) = u C'(u)/C(u), the mixing mean at parameter u; at the far
    // tail u underflows to 0 where M tends to the smallest active power.
    const double mean_u =
        u == 0.0 ? static_cast<double>(p.family.min_power()) : 1.0 - u * p.family.D1(u);
    return p.beta * std::exp(p.gamma * x) * mean_u;
}

double quantile(const GpsParams& p, double q) {
    if (!(q >= 0.0) || q > 1.0) throw std::domain_error("quantile: q must be in [0,1)");
    if (q == 0.0) return 0.0;
    if (q == 1.0) return kInf;
    double log_t;
    if (p.extended_gg) {
        // invert t (1-theta)/(1-theta t) = 1-q directly; theta may be negative
        const double ts = p.theta_star();
        log_t = std::log1p(-q) - std::log1p(q * (ts - 1.0));
    } else {
        const double t = p.family.inverse_C((1.0 - q) * p.family.C(p.theta)) / p.theta;
        log_t = std::log(t);
    }
    return gompertz_quantile_from_log_tail(p.base(), log_t);
}

std::vector<double> sample(const GpsParams& p, std::size_t count, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(quantile(p, rng.uniform()));
    return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo)) throw std::invalid_argument("linear_grid: need hi > lo and >= 2 points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

void emit_curve(const GpsParams& p, const std::vector<double>& grid, std::ostream& os) {
    os << "x\tpdf\tcdf\tsurvival\thazard\n";
    for (const double x : grid)
        os << x << '\t' << pdf(p, x) << '\t' << cdf(p, x) << '\t' << survival(p, x)
           << '\t' << hazard(p, x) << '\n';
}

}  // namespace gps
