#include "gps/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gps {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool theta_admissible(const GpsParams& p) {
    if (p.extended_gg) return p.theta < 1.0 - 1e-12;
    return p.family.contains(p.theta);
}

// (e^{g x} - 1 - g x)/g^2, stable for small g x
double expm1_minus_x(double gamma, double x) {
    const double gx = gamma * x;
    if (std::abs(gx) < 1e-4) {
        const double x2 = x * x;
        return x2 * (0.5 + gx / 6.0 + gx * gx / 24.0);
    }
    return (std::expm1(gx) - gx) / (gamma * gamma);
}

// ((g x - 2) expm1(g x) + 2 g x)/g^3, stable for small g x
double q_kernel(double gamma, double x) {
    const double gx = gamma * x;
    if (std::abs(gx) < 1e-4) {
        const double x3 = x * x * x;
        return x3 * (1.0 / 6.0 + gx / 12.0);
    }
    return ((gx - 2.0) * std::expm1(gx) + 2.0 * gx) / (gamma * gamma * gamma);
}

}  // namespace

void ObservedSample::validate() const {
    if (values.empty()) throw std::invalid_argument("ObservedSample: empty");
    for (double v : values)
        if (!(v > 0.0)) throw std::invalid_argument("ObservedSample: values must be > 0");
}

void CensoredSample::validate() const {
    if (values.empty()) throw std::invalid_argument("CensoredSample: empty");
    if (values.size() != indicators.size())
        throw std::invalid_argument("CensoredSample: length mismatch");
    bool any_event = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0))
            throw std::invalid_argument("CensoredSample: values must be > 0");
        if (indicators[i] != 0 && indicators[i] != 1)
            throw std::invalid_argument("CensoredSample: indicators must be 0/1");
        any_event |= indicators[i] == 1;
    }
    if (!any_event) throw std::invalid_argument("CensoredSample: needs at least one event");
}

std::size_t CensoredSample::n_events() const {
    std::size_t n = 0;
    for (int d : indicators) n += d;
    return n;
}

ScoreWorkspace ScoreWorkspace::build(const GpsParams& p, const std::vector<double>& xs,
                                     bool with_a1) {
    ScoreWorkspace w;
    const std::size_t n = xs.size();
    w.x = xs;
    w.log_t.resize(n);
    w.t.resize(n);
    w.d.resize(n);
    w.b.resize(n);
    w.q.resize(n);
    w.u.resize(n);
    w.a2.resize(n);
    w.a3.resize(n);
    if (with_a1) w.a1.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xs[i];
        const double lt = gompertz_log_tail(p.base(), x);
        const double t = std::exp(lt);
        w.log_t[i] = lt;
        w.t[i] = t;
        w.d[i] = p.beta * expm1_minus_x(p.gamma, x) + x * lt;
        w.b[i] = t * w.d[i];
        w.q[i] = w.d[i] * x + p.beta * q_kernel(p.gamma, x);
        const double u = p.theta * t;
        w.u[i] = u;
        w.a2[i] = p.family.A2(u);
        w.a3[i] = p.family.A3(u);
        if (with_a1) w.a1[i] = p.family.A1(u);
    }
    w.d1 = p.family.D1(p.theta);
    w.d2 = p.family.D2(p.theta);
    return w;
}

double censored_log_likelihood(const GpsParams& p, const CensoredSample& data) {
    if (!(p.beta > 0.0) || !(p.gamma > 0.0) || !theta_admissible(p)) return kNegInf;
    const double log_ratio = p.family.log_theta_over_C(p.theta);
    double ll = 0.0;
    for (std::size_t i = 0; i < data.values.size(); ++i) {
        const double x = data.values[i];
        const double lt = gompertz_log_tail(p.base(), x);
        if (data.indicators[i] == 1) {
            ll += std::log(p.beta) + p.gamma * x + lt +
                  p.family.log_Cprime(p.theta * std::exp(lt)) + log_ratio;
        } else {
            ll += std::log(p.family.survival_ratio(p.theta, std::exp(lt)));
        }
    }
    return std::isfinite(ll) ? ll : kNegInf;
}

double log_likelihood(const GpsParams& p, const ObservedSample& data) {
    if (!(p.beta > 0.0) || !(p.gamma > 0.0) || !theta_admissible(p)) return kNegInf;
    const double log_ratio = p.family.log_theta_over_C(p.theta);
    double ll = 0.0;
    for (const double x : data.values) {
        const double lt = gompertz_log_tail(p.base(), x);
        ll += std::log(p.beta) + p.gamma * x + lt +
              p.family.log_Cprime(p.theta * std::exp(lt)) + log_ratio;
    }
    return std::isfinite(ll) ? ll : kNegInf;
}

namespace {

struct DerivAccum {
    Vec3 grad{0.0, 0.0, 0.0};
    Mat3 hess{{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
};

// Analytic gradient and Hessian of the log-likelihood, event and censored
// observations assembled from the same workspace kernels.
DerivAccum accumulate_derivatives(const GpsParams& p, const std::vector<double>& xs,
                                  const std::vector<int>* indicators) {
    const bool any_censored = indicators != nullptr;
    const ScoreWorkspace w = ScoreWorkspace::build(p, xs, any_censored);
    const double beta = p.beta;
    const double theta = p.theta;
    DerivAccum acc;
    auto& g = acc.grad;
    auto& h = acc.hess;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = w.x[i], lt = w.log_t[i], t = w.t[i], d = w.d[i], b = w.b[i],
                     q = w.q[i], u = w.u[i], a2 = w.a2[i], a3 = w.a3[i];
        const double da = a3 - a2 * a2;
        if (!any_censored || (*indicators)[i] == 1) {
            g[0] += 1.0 / beta + lt / beta + (theta / beta) * t * lt * a2;
            g[1] += x + d + theta * b * a2;
            g[2] += w.d1 + t * a2;
            h[0][0] += -1.0 / (beta * beta) + (theta / (beta * beta)) * t * lt * lt * a2 +
                       (theta * theta / (beta * beta)) * t * t * lt * lt * da;
            h[0][1] += d / beta + (theta / beta) * (b * lt * a2 + b * a2) +
                       (theta * theta / beta) * t * b * lt * da;
            h[0][2] += (t * lt / beta) * a2 + (theta / beta) * t * t * lt * da;
            h[1][1] += q + theta * (b * d + t * q) * a2 + theta * theta * b * b * da;
            h[1][2] += b * a2 + theta * t * b * da;
            h[2][2] += w.d2 + t * t * da;
        } else {
            const double a1 = w.a1[i];
            const double dc = a2 - a1;  // d/du log A1-kernel: A1' = A1 (A2 - A1)
            g[0] += theta * a1 * t * lt / beta;
            g[1] += theta * a1 * b;
            g[2] += w.d1 - t * p.family.D1(u);
            h[0][0] += (theta / (beta * beta)) * a1 * t * lt * lt +
                       (theta * theta / (beta * beta)) * t * t * lt * lt * a1 * dc;
            h[0][1] += (theta / beta) * (a1 * b * lt + a1 * b + theta * t * b * lt * a1 * dc);
            h[0][2] += (t * lt / beta) * (a1 + theta * t * a1 * dc);
            h[1][1] += theta * a1 * (b * d + t * q) + theta * theta * b * b * a1 * dc;
            h[1][2] += b * (a1 + theta * t * a1 * dc);
            h[2][2] += w.d2 - t * t * p.family.D2(u);
        }
    }
    h[1][0] = h[0][1];
    h[2][0] = h[0][2];
    h[2][1] = h[1][2];
    return acc;
}

Mat3 negate(Mat3 m) {
    for (auto& row : m)
        for (auto& v : row) v = -v;
    return m;
}

}  // namespace

Vec3 score(const GpsParams& p, const ObservedSample& data) {
    return accumulate_derivatives(p, data.values, nullptr).grad;
}

Vec3 censored_score(const GpsParams& p, const CensoredSample& data) {
    return accumulate_derivatives(p, data.values, &data.indicators).grad;
}

Mat3 observed_information(const GpsParams& p, const ObservedSample& data) {
    return negate(accumulate_derivatives(p, data.values, nullptr).hess);
}

Mat3 censored_observed_information(const GpsParams& p, const CensoredSample& data) {
    return negate(accumulate_derivatives(p, data.values, &data.indicators).hess);
}

Mat3 complete_information(const GpsParams& p, const ObservedSample& data) {
    const std::size_t n = data.values.size();
    const double beta = p.beta, gamma = p.gamma, theta = p.theta;
    Mat3 c{{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
    double sum_ta2 = 0.0;
    for (const double x : data.values) {
        const double t = gompertz_tail(p.base(), x);
        const double u = theta * t;
        const double a2 = p.family.A2(u);
        const double ez = 1.0 + u * a2;
        const double w = std::expm1(gamma * x);
        const double xe = x * std::exp(gamma * x);
        c[0][1] += ez * (-w / (gamma * gamma) + xe / gamma);
        c[1][1] += ez * (2.0 * beta * w / (gamma * gamma * gamma) -
                         2.0 * beta * xe / (gamma * gamma) + beta * x * xe / gamma);
        sum_ta2 += t * a2;
    }
    c[0][0] = n / (beta * beta);
    c[1][0] = c[0][1];
    // (1/theta^2) sum E(Z|x) + n C''/C - n (C'/C)^2, with the 1/theta^2 poles
    // cancelled against -n D2 analytically
    c[2][2] = sum_ta2 / theta - static_cast<double>(n) * p.family.D2(p.theta);
    return c;
}

Mat3 missing_information(const GpsParams& p, const ObservedSample& data) {
    const double beta = p.beta, gamma = p.gamma, theta = p.theta;
    Mat3 v{{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
    for (const double x : data.values) {
        const double t = gompertz_tail(p.base(), x);
        const double u = theta * t;
        const double var = p.family.posterior_var_Z(u);
        const double w = std::expm1(gamma * x);
        const double k = w - gamma * x * std::exp(gamma * x);  // e^{gx}-1-gx e^{gx}
        v[0][0] += var * w * w;
        v[0][1] += var * w * k;
        v[0][2] += var * w;
        v[1][1] += var * k * k;
        v[1][2] += var * k;
        v[2][2] += var;
    }
    const double g2 = gamma * gamma;
    v[0][0] /= g2;
    v[0][1] *= -beta / (g2 * gamma);
    v[0][2] *= -1.0 / (gamma * theta);
    v[1][1] *= beta * beta / (g2 * g2);
    v[1][2] *= beta / (theta * g2);
    v[2][2] /= theta * theta;
    v[1][0] = v[0][1];
    v[2][0] = v[0][2];
    v[2][1] = v[1][2];
    return v;
}

Mat3 louis_information(const GpsParams& p, const ObservedSample& data) {
    const Mat3 c = complete_information(p, data);
    const Mat3 m = missing_information(p, data);
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = c[i][j] - m[i][j];
    return out;
}

BetaBracket beta_bracket(double gamma, double theta, const PowerSeriesFamily& family,
                         const std::vector<double>& xs) {
    if (!(gamma > 0.0)) throw std::domain_error("beta_bracket: gamma must be > 0");
    family.require_theta(theta);
    double sum_neg_log_p = 0.0;  // -sum log p_i = sum (e^{gamma x_i}-1)/gamma
    for (const double x : xs) sum_neg_log_p += gompertz_exponent(gamma, x);
    if (!(sum_neg_log_p > 0.0))
        throw std::logic_error("beta_bracket: degenerate data, sum log p_i >= 0");
    const double n = static_cast<double>(xs.size());
    const double ratio = theta * family.C(theta, 2) / family.C(theta, 1);
    return {n / ((ratio + 1.0) * sum_neg_log_p), n / sum_neg_log_p};
}

ExistenceFlags existence_flags(const GpsParams& p, const std::vector<double>& xs) {
    ExistenceFlags f;
    const double n = static_cast<double>(xs.size());
    double xbar = 0.0, cond2 = 0.0, sum_t = 0.0, sum_inv_t = 0.0;
    for (const double x : xs) {
        xbar += x / n;
        const double u0 = p.theta * std::exp(-p.beta * x);  // gamma -> 0 limit of u
        cond2 += x * x * (1.0 + u0 * p.family.A2(u0));
        const double t = gompertz_tail(p.base(), x);
        sum_t += t;
        sum_inv_t += 1.0 / t;
    }
    f.gamma_root = n * xbar - 0.5 * p.beta * cond2 > 0.0;
    f.theta_root = sum_t > 0.5 * n;
    if (p.family.kind() == FamilyKind::binomial) {
        const double m = p.family.binomial_m();
        f.theta_root_second = m == 1.0 || sum_inv_t > n * m / (1.0 - m);
    }
    return f;
}

Vec3 solve3(const Mat3& a, const Vec3& b) {
    // Cramer via the adjugate; fine at this size
    const Mat3 inv = invert3(a);
    Vec3 out{0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i] += inv[i][j] * b[j];
    return out;
}

Mat3 invert3(const Mat3& a) {
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if (det == 0.0 || !std::isfinite(det))
        throw std::runtime_error("invert3: singular matrix");
    const double inv_det = 1.0 / det;
    Mat3 r;
    r[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv_det;
    r[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_det;
    r[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_det;
    r[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv_det;
    r[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_det;
    r[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_det;
    r[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv_det;
    r[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_det;
    r[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_det;
    return r;
}

bool cholesky3(const Mat3& a, Mat3& lower) {
    Mat3 l{{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                l[i][i] = std::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    lower = l;
    return true;
}

}  // namespace gps
