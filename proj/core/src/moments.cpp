#include "gps/moments.hpp"

#include <cmath>
#include <stdexcept>

#include "gps/quadrature.hpp"
#include "gps/special_functions.hpp"

namespace gps {

namespace {

constexpr int kMaxSeriesN = 200000;

bool series_usable(const GpsParams& p) {
    return !(p.extended_gg && !p.family.contains(p.theta));
}

double integrate_density(const GpsParams& p, const std::function<double(double)>& g) {
    const double hi = upper_support(p);
    return integrate([&](double x) { return g(x) * pdf(p, x); }, 0.0, hi);
}

}  // namespace

double upper_support(const GpsParams& p) {
    return quantile(p, 1.0 - 1e-12);
}

void for_each_pmf(const PowerSeriesFamily& family, double theta,
                  const std::function<void(int, double)>& visit) {
    family.require_theta(theta);
    if (family.kind() == FamilyKind::polynomial) {
        const double logC = family.log_C(theta);
        for (const auto& [n, a] : family.terms())
            visit(n, std::exp(std::log(a) + n * std::log(theta) - logC));
        return;
    }
    double mass = 0.0;
    for (int n = 1; n <= kMaxSeriesN; ++n) {
        const double w = family.pmf(theta, n);
        visit(n, w);
        mass += w;
        if (mass >= 1.0 - kPmfTailEps) break;
        if (family.kind() == FamilyKind::binomial && n >= family.binomial_m()) break;
    }
}

MomentResult moment_detail(const GpsParams& p, int r) {
    if (r < 1) throw std::domain_error("moment: r must be >= 1");
    p.validate();
    if (series_usable(p)) {
        const double rfact = std::tgamma(r + 1.0);
        double sum = 0.0;
        bool finite = true;
        for_each_pmf(p.family, p.theta, [&](int n, double w) {
            if (!finite || w == 0.0) return;
            const double z = n * p.beta / p.gamma;
            const double term = w * rfact * std::pow(p.gamma, -r) *
                                gen_integro_exponential_scaled(r, z);
            if (!std::isfinite(term)) finite = false;
            else sum += term;
        });
        if (finite) return {sum, false};
    }
    double xr = integrate_density(p, [&](double x) { return std::pow(x, r); });
    return {xr, true};
}

double moment(const GpsParams& p, int r) { return moment_detail(p, r).value; }

double mgf(const GpsParams& p, double t) {
    p.validate();
    if (!(t < p.gamma)) throw std::domain_error("mgf: requires t < gamma");
    if (t == 0.0) return 1.0;
    if (series_usable(p)) {
        const double f = -t / p.gamma;
        double sum = 0.0;
        bool finite = true;
        for_each_pmf(p.family, p.theta, [&](int n, double w) {
            if (!finite || w == 0.0) return;
            const double z = n * p.beta / p.gamma;
            const double term =
                w * (p.beta / p.gamma) * n * integro_exponential_scaled(f, z);
            if (!std::isfinite(term)) finite = false;
            else sum += term;
        });
        if (finite) return sum;
    }
    return integrate_density(p, [&](double x) { return std::exp(t * x); });
}

double mean_small_beta_approx(int n, double beta, double gamma) {
    if (n < 1 || !(beta > 0.0) || !(gamma > 0.0))
        throw std::domain_error("mean_small_beta_approx: need n >= 1, beta > 0, gamma > 0");
    const double z = n * beta / gamma;
    return std::exp(z) * (z - std::log(z) - 0.57722) / gamma;
}

namespace {

double log_binom(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void require_rank(int n, int i) {
    if (n < 1 || i < 1 || i > n)
        throw std::domain_error("order statistic: need 1 <= i <= n");
}

}  // namespace

double order_stat_pdf(const GpsParams& p, int n, int i, double x) {
    require_rank(n, i);
    if (x < 0.0) return 0.0;
    const double F = cdf(p, x);
    const double S = survival(p, x);
    const double coef = std::exp(log_binom(n, i) + std::log(static_cast<double>(i)));
    return coef * pdf(p, x) * std::pow(F, i - 1) * std::pow(S, n - i);
}

double order_stat_cdf(const GpsParams& p, int n, int i, double x) {
    require_rank(n, i);
    if (x <= 0.0) return 0.0;
    const double F = cdf(p, x);
    const double coef = std::exp(log_binom(n, i) + std::log(static_cast<double>(i)));
    double sum = 0.0;
    for (int k = 0; k <= n - i; ++k) {
        const double term = std::exp(log_binom(n - i, k)) / (k + i) * std::pow(F, k + i);
        sum += (k % 2 == 0) ? term : -term;
    }
    return coef * sum;
}

double order_stat_moment(const GpsParams& p, int n, int i, int r) {
    require_rank(n, i);
    if (r < 1) throw std::domain_error("order_stat_moment: r must be >= 1");
    p.validate();
    const double hi = upper_support(p);
    double sum = 0.0;
    for (int k = n - i + 1; k <= n; ++k) {
        const double integral = integrate(
            [&](double x) { return std::pow(x, r - 1) * std::pow(survival(p, x), k); },
            0.0, hi);
        const double coef =
            r * std::exp(log_binom(k - 1, n - i) + log_binom(n, k)) * integral;
        sum += ((k - n + i - 1) % 2 == 0) ? coef : -coef;
    }
    return sum;
}

double shannon_entropy(const GpsParams& p) {
    p.validate();
    const double hi = upper_support(p);
    return integrate(
        [&](double x) {
            const double lf = log_pdf(p, x);
            return -std::exp(lf) * lf;
        },
        0.0, hi);
}

double shannon_entropy_series(const GpsParams& p) {
    p.validate();
    if (!series_usable(p))
        throw std::domain_error("shannon_entropy_series: needs theta in the family domain");
    const double mu1 = moment(p, 1);
    const double mx = mgf(p, p.gamma - 1e-6);
    double ea = 0.0;  // E_N[ A(N, theta) ], A = int_0^1 N u^{N-1} log C'(theta u) du
    for_each_pmf(p.family, p.theta, [&](int n, double w) {
        if (w == 0.0) return;
        const double a_n = integrate(
            [&](double u) {
                return n * std::pow(u, n - 1) * p.family.log_Cprime(p.theta * u);
            },
            0.0, 1.0);
        ea += w * a_n;
    });
    const double ratio = p.beta / p.gamma;
    return -std::log(p.beta) - p.family.log_theta_over_C(p.theta) - p.gamma * mu1 -
           ratio + ratio * mx - ea;
}

double mean_residual_life(const GpsParams& p, double t) {
    p.validate();
    if (t < 0.0) throw std::domain_error("mean_residual_life: t must be >= 0");
    const double st = survival(p, t);
    const double hi = std::max(upper_support(p), 2.0 * t + 1.0);
    const double tail_area = integrate([&](double x) { return survival(p, x); }, t, hi);
    return tail_area / st;
}

double mean_residual_life_series(const GpsParams& p, double t) {
    p.validate();
    if (t < 0.0) throw std::domain_error("mean_residual_life: t must be >= 0");
    if (!series_usable(p))
        throw std::domain_error("mean_residual_life_series: needs theta in the family domain");
    const double tl = gompertz_tail(p.base(), t);
    double eb = 0.0;  // E_N[ B(t, N, beta, gamma) ]
    for_each_pmf(p.family, p.theta, [&](int n, double w) {
        if (w == 0.0) return;
        const GompertzParams gn{n * p.beta, p.gamma};
        const GpsParams single{gn.beta, gn.gamma, 1.0,
                               PowerSeriesFamily::polynomial({{1, 1.0}}), false};
        const double hi = std::max(upper_support(single), 2.0 * t + 1.0);
        eb += w * integrate([&](double x) { return x * gompertz_pdf(gn, x); }, t, hi);
    });
    return eb / p.family.survival_ratio(p.theta, tl) - t;
}

}  // namespace gps
