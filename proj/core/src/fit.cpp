#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "gps/estimation.hpp"
#include "gps/special_functions.hpp"

namespace gps {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- scalars

double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  int iters = 200) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && b - a > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a); f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// root of f on a sign-changing bracket [lo, hi]; Illinois-style false
// position with a periodic bisection so wildly unbalanced endpoint values
// (e.g. a pole at one end) cannot stall the bracket
double solve_root(const std::function<double(double)>& f, double lo, double hi,
                  double flo, double fhi) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::logic_error("solve_root: no sign change");
    double a = lo, b = hi, fa = flo, fb = fhi;
    int last_side = 0;
    for (int i = 0; i < 200; ++i) {
        double c = (i % 4 == 3) ? 0.5 * (a + b)
                                : b - fb * (b - a) / (fb - fa);
        if (!(c > a) || !(c < b)) c = 0.5 * (a + b);
        const double fc = f(c);
        if (fc == 0.0 || b - a < 1e-13 * (1.0 + std::abs(c))) return c;
        if (fa * fc < 0.0) {
            b = c;
            fb = fc;
            if (last_side == 1) fa *= 0.5;
            last_side = 1;
        } else {
            a = c;
            fa = fc;
            if (last_side == -1) fb *= 0.5;
            last_side = -1;
        }
    }
    return 0.5 * (a + b);
}

// ------------------------------------------------------------- transforms

enum class ThetaMap { logit, logscale, extended, frozen };

ThetaMap theta_map_for(const PowerSeriesFamily& family, bool extended, bool degenerate) {
    if (degenerate) return ThetaMap::frozen;
    if (extended) return ThetaMap::extended;
    if (std::isfinite(family.theta_sup())) return ThetaMap::logit;  // (0,1) families
    return ThetaMap::logscale;
}

double theta_to_tau(ThetaMap map, double theta) {
    switch (map) {
        case ThetaMap::logit: return std::log(theta / (1.0 - theta));
        case ThetaMap::logscale: return std::log(theta);
        case ThetaMap::extended: return std::log(1.0 - theta);  // tau = log theta*
        case ThetaMap::frozen: return 0.0;
    }
    return 0.0;
}

double tau_to_theta(ThetaMap map, double tau) {
    switch (map) {
        case ThetaMap::logit: return 1.0 / (1.0 + std::exp(-tau));
        case ThetaMap::logscale: return std::exp(tau);
        case ThetaMap::extended: return 1.0 - std::exp(tau);
        case ThetaMap::frozen: return 1.0;
    }
    return 1.0;
}

double dtheta_dtau(ThetaMap map, double theta) {
    switch (map) {
        case ThetaMap::logit: return theta * (1.0 - theta);
        case ThetaMap::logscale: return theta;
        case ThetaMap::extended: return theta - 1.0;  // -theta*
        case ThetaMap::frozen: return 0.0;
    }
    return 0.0;
}

double d2theta_dtau2(ThetaMap map, double theta) {
    switch (map) {
        case ThetaMap::logit: return theta * (1.0 - theta) * (1.0 - 2.0 * theta);
        case ThetaMap::logscale: return theta;
        case ThetaMap::extended: return theta - 1.0;
        case ThetaMap::frozen: return 0.0;
    }
    return 0.0;
}

// ------------------------------------------------------------ data access

struct DataRef {
    const std::vector<double>* xs;
    const std::vector<int>* indicators;  // null for complete data

    std::size_t n() const { return xs->size(); }
    std::size_t n_events() const {
        if (!indicators) return xs->size();
        std::size_t k = 0;
        for (int d : *indicators) k += d;
        return k;
    }
};

double eval_loglik(const GpsParams& p, const DataRef& data) {
    if (data.indicators)
        return censored_log_likelihood(p, CensoredSample{*data.xs, *data.indicators});
    return log_likelihood(p, ObservedSample{*data.xs});
}

Vec3 eval_score(const GpsParams& p, const DataRef& data) {
    if (data.indicators)
        return censored_score(p, CensoredSample{*data.xs, *data.indicators});
    return score(p, ObservedSample{*data.xs});
}

Mat3 eval_information(const GpsParams& p, const DataRef& data) {
    if (data.indicators)
        return censored_observed_information(p, CensoredSample{*data.xs, *data.indicators});
    return observed_information(p, ObservedSample{*data.xs});
}

// ---------------------------------------------------------------- kernels

double sum_gompertz_exponent(double gamma, const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += gompertz_exponent(gamma, x);
    return s;
}

}  // namespace

GompertzParams gompertz_profile_fit(const std::vector<double>& xs,
                                    const std::vector<int>* indicators) {
    double n_ev = 0.0, sx_ev = 0.0, xmax = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const bool event = !indicators || (*indicators)[i] == 1;
        if (event) {
            n_ev += 1.0;
            sx_ev += xs[i];
        }
        xmax = std::max(xmax, xs[i]);
    }
    if (n_ev == 0.0) throw std::invalid_argument("gompertz_profile_fit: no events");
    // profile log-likelihood over gamma with beta(gamma) = n_ev / K(gamma)
    auto profile = [&](double log_gamma) {
        const double g = std::exp(log_gamma);
        const double K = sum_gompertz_exponent(g, xs);
        return g * sx_ev - n_ev * std::log(K);
    };
    const double lo = std::log(1e-6 / xmax), hi = std::log(5e3 / xmax);
    double best = lo, best_val = profile(lo);
    const int coarse = 80;
    for (int i = 1; i <= coarse; ++i) {
        const double s = lo + (hi - lo) * i / coarse;
        const double v = profile(s);
        if (v > best_val) { best_val = v; best = s; }
    }
    const double step = (hi - lo) / coarse;
    const double s_hat = golden_max(profile, best - step, best + step);
    const double gamma = std::exp(s_hat);
    return {n_ev / sum_gompertz_exponent(gamma, xs), gamma};
}

namespace {

// ------------------------------------------------------------ direct MLE

struct NewtonState {
    GpsParams params{1.0, 1.0, 0.5, PowerSeriesFamily::geometric(), false};
    double ll = 0.0;
    int iterations = 0;
    bool converged = false;
    bool used_direct_search = false;
};

struct EtaSpace {
    ThetaMap map;
    bool theta_frozen = false;

    Vec3 to_eta(const GpsParams& p) const {
        return {std::log(p.beta), std::log(p.gamma),
                theta_frozen ? 0.0 : theta_to_tau(map, p.theta)};
    }
    GpsParams at(const GpsParams& proto, const Vec3& eta, double frozen_theta) const {
        GpsParams p = proto;
        p.beta = std::exp(eta[0]);
        p.gamma = std::exp(eta[1]);
        p.theta = theta_frozen ? frozen_theta : tau_to_theta(map, eta[2]);
        return p;
    }
};

// The default theta seed is the domain midpoint; the likelihood can carry
// secondary stationary points, so fits are restarted from flanking seeds and
// the best final log-likelihood wins. Newton and EM share this start list so
// the two methods land in the same basin.
std::vector<double> theta_starts(ThetaMap map) {
    switch (map) {
        case ThetaMap::logit: return {0.5, 0.25, 0.75};
        case ThetaMap::logscale: return {1.0, 0.4, 2.5};
        case ThetaMap::extended: return {0.0, 0.5, -2.0};  // theta* = 1, 1/2, 3
        case ThetaMap::frozen: return {1.0};
    }
    return {1.0};
}

GpsParams start_at(const PowerSeriesFamily& family, double gamma0, double theta0,
                   ThetaMap map, bool extended, FitDiagnostics& diag,
                   const DataRef& data) {
    double beta0;
    if (map == ThetaMap::logit || map == ThetaMap::logscale) {
        const BetaBracket bracket = beta_bracket(gamma0, theta0, family, *data.xs);
        if (diag.init_bracket.hi == 0.0) diag.init_bracket = bracket;
        beta0 = bracket.midpoint();
    } else {
        // extended GG (theta* = 1) and degenerate families: the bracket
        // collapses to the Gompertz profile root
        beta0 = static_cast<double>(data.n_events()) /
                sum_gompertz_exponent(gamma0, *data.xs);
    }
    return {beta0, gamma0, theta0, family, extended};
}

NewtonState nelder_mead(const EtaSpace& space, const GpsParams& proto, Vec3 eta0,
                        double frozen_theta, const DataRef& data, int max_iter) {
    const int dim = space.theta_frozen ? 2 : 3;
    auto value = [&](const Vec3& e) { return eval_loglik(space.at(proto, e, frozen_theta), data); };

    std::vector<Vec3> simplex(dim + 1, eta0);
    std::vector<double> fv(dim + 1);
    for (int i = 1; i <= dim; ++i) simplex[i][i - 1] += 0.25;
    for (int i = 0; i <= dim; ++i) fv[i] = value(simplex[i]);

    auto order = [&] {
        for (int i = 0; i <= dim; ++i)
            for (int j = i + 1; j <= dim; ++j)
                if (fv[j] > fv[i]) { std::swap(fv[i], fv[j]); std::swap(simplex[i], simplex[j]); }
    };
    order();
    int it = 0;
    for (; it < max_iter; ++it) {
        if (std::abs(fv[0] - fv[dim]) < 1e-12 * (1.0 + std::abs(fv[0]))) break;
        Vec3 centroid{0.0, 0.0, 0.0};
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < 3; ++k) centroid[k] += simplex[i][k] / dim;
        auto blend = [&](double c) {
            Vec3 e = centroid;
            for (int k = 0; k < 3; ++k) e[k] += c * (centroid[k] - simplex[dim][k]);
            if (space.theta_frozen) e[2] = eta0[2];
            return e;
        };
        const Vec3 refl = blend(1.0);
        const double f_refl = value(refl);
        if (f_refl > fv[0]) {
            const Vec3 expd = blend(2.0);
            const double f_expd = value(expd);
            if (f_expd > f_refl) { simplex[dim] = expd; fv[dim] = f_expd; }
            else { simplex[dim] = refl; fv[dim] = f_refl; }
        } else if (f_refl > fv[dim - 1]) {
            simplex[dim] = refl; fv[dim] = f_refl;
        } else {
            const Vec3 contr = blend(-0.5);
            const double f_contr = value(contr);
            if (f_contr > fv[dim]) { simplex[dim] = contr; fv[dim] = f_contr; }
            else {
                for (int i = 1; i <= dim; ++i) {
                    for (int k = 0; k < 3; ++k)
                        simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
                    fv[i] = value(simplex[i]);
                }
            }
        }
        order();
    }
    NewtonState st;
    st.params = space.at(proto, simplex[0], frozen_theta);
    st.ll = fv[0];
    st.iterations = it;
    st.converged = true;
    st.used_direct_search = true;
    return st;
}

NewtonState newton_maximize(const PowerSeriesFamily& family, const DataRef& data,
                            GpsParams start, ThetaMap map, const FitOptions& opts,
                            FitDiagnostics& diag) {
    EtaSpace space{map, map == ThetaMap::frozen};
    GpsParams proto = start;
    double frozen_theta = start.theta;
    Vec3 eta = space.to_eta(start);
    NewtonState st{start, eval_loglik(start, data)};
    int domain_exits = 0;

    for (st.iterations = 0; st.iterations < opts.max_iter; ++st.iterations) {
        const GpsParams p = space.at(proto, eta, frozen_theta);

        // boundary watch: a (0,1)-constrained theta that keeps sliding below
        // 1e-6 has collapsed to the Gompertz submodel (Prop. 2); freeze it
        if (!space.theta_frozen && map == ThetaMap::logit) {
            if (p.theta < 1e-6) {
                space.theta_frozen = true;
                frozen_theta = p.theta;
                diag.boundary_gompertz = true;
            } else if (1.0 - p.theta < 1e-10) {
                space.theta_frozen = true;
                frozen_theta = p.theta;
                diag.boundary_upper = true;
            }
        }
        if (!space.theta_frozen && map == ThetaMap::logscale && p.theta < 1e-9) {
            space.theta_frozen = true;
            frozen_theta = p.theta;
            diag.boundary_gompertz = true;
        }

        const Vec3 g_theta = eval_score(p, data);
        const Mat3 info = eval_information(p, data);
        const Vec3 jac{p.beta, p.gamma, space.theta_frozen ? 0.0 : dtheta_dtau(map, p.theta)};
        const Vec3 jac2{p.beta, p.gamma, space.theta_frozen ? 0.0 : d2theta_dtau2(map, p.theta)};

        Vec3 g{0.0, 0.0, 0.0};
        Mat3 B{{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};  // -Hessian in eta
        for (int i = 0; i < 3; ++i) {
            g[i] = g_theta[i] * jac[i];
            for (int j = 0; j < 3; ++j) B[i][j] = info[i][j] * jac[i] * jac[j];
            B[i][i] -= g_theta[i] * jac2[i];
        }
        if (space.theta_frozen) {
            g[2] = 0.0;
            B[0][2] = B[1][2] = B[2][0] = B[2][1] = 0.0;
            B[2][2] = 1.0;
        }

        const double gmax = std::max({std::abs(g[0]), std::abs(g[1]), std::abs(g[2])});
        if (gmax < opts.score_tol) {
            st.converged = true;
            break;
        }

        // make B positive definite (ridge) so the step ascends
        Mat3 chol;
        double ridge = 0.0;
        Mat3 Br = B;
        while (!cholesky3(Br, chol)) {
            ridge = ridge == 0.0 ? 1e-6 : ridge * 10.0;
            if (ridge > 1e12) break;
            Br = B;
            for (int i = 0; i < 3; ++i) Br[i][i] += ridge;
        }
        Vec3 step;
        if (ridge > 1e12) {
            const double scale = 1.0 / std::max(1.0, gmax);
            step = {g[0] * scale, g[1] * scale, g[2] * scale};
        } else {
            step = solve3(Br, g);
        }
        if (space.theta_frozen) step[2] = 0.0;

        // backtracking line search on the log-likelihood
        double alpha = 1.0;
        bool accepted = false;
        double ll_new = kNegInf;
        Vec3 eta_new{};
        for (int half = 0; half < 60; ++half, alpha *= 0.5) {
            eta_new = {eta[0] + alpha * step[0], eta[1] + alpha * step[1],
                       eta[2] + alpha * step[2]};
            if (std::abs(eta_new[0]) > 700.0 || std::abs(eta_new[1]) > 700.0 ||
                std::abs(eta_new[2]) > 700.0) {
                ++domain_exits;
                continue;
            }
            ll_new = eval_loglik(space.at(proto, eta_new, frozen_theta), data);
            if (!std::isfinite(ll_new)) {
                ++domain_exits;
                continue;
            }
            if (ll_new > st.ll + 1e-4 * alpha *
                             (g[0] * step[0] + g[1] * step[1] + g[2] * step[2])) {
                accepted = true;
                break;
            }
        }
        if (domain_exits >= 5 || !accepted) {
            // Newton has been pushed out of the domain repeatedly (or cannot
            // ascend); hand over to direct search for the remaining budget
            NewtonState nm = nelder_mead(space, proto, eta, frozen_theta, data,
                                         std::max(100, opts.max_iter - st.iterations));
            nm.iterations += st.iterations;
            if (nm.ll > st.ll) return nm;
            st.used_direct_search = true;
            st.converged = gmax < 1e-5;  // ascent exhausted at the noise floor
            break;
        }

        const double dmax = std::max({std::abs(eta_new[0] - eta[0]),
                                      std::abs(eta_new[1] - eta[1]),
                                      std::abs(eta_new[2] - eta[2])});
        eta = eta_new;
        st.ll = ll_new;
        st.params = space.at(proto, eta, frozen_theta);
        if (dmax < opts.step_tol) {
            st.converged = true;
            break;
        }
    }
    st.params = space.at(proto, eta, frozen_theta);
    st.ll = eval_loglik(st.params, data);
    return st;
}

FitResult finish_fit(const PowerSeriesFamily& family, const DataRef& data,
                     const NewtonState& st, FitDiagnostics diag, const char* method) {
    FitResult fit;
    fit.params = st.params;
    fit.loglik = st.ll;
    fit.iterations = st.iterations;
    fit.converged = st.converged;
    fit.method = method;
    fit.n_free = st.params.degenerate() ? 2 : 3;
    diag.flags = existence_flags(st.params, *data.xs);
    diag.used_direct_search = st.used_direct_search;
    fit.diagnostics = diag;
    fit.info = eval_information(st.params, data);

    fit.std_errors = {kNan, kNan, kNan};
    const bool theta_fixed = fit.n_free == 2 || diag.boundary_gompertz;
    try {
        if (!theta_fixed) {
            const Mat3 inv = invert3(fit.info);
            bool ok = true;
            for (int i = 0; i < 3; ++i) ok &= inv[i][i] > 0.0;
            if (!ok) throw std::runtime_error("information not positive definite");
            for (int i = 0; i < 3; ++i) fit.std_errors[i] = std::sqrt(inv[i][i]);
            fit.se_available = true;
        } else {
            const auto& m = fit.info;
            const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if (det <= 0.0) throw std::runtime_error("2x2 information singular");
            fit.std_errors[0] = std::sqrt(m[1][1] / det);
            fit.std_errors[1] = std::sqrt(m[0][0] / det);
            fit.se_available = true;
        }
    } catch (const std::exception&) {
        fit.se_available = false;
    }
    return fit;
}

FitResult mle_direct_impl(const PowerSeriesFamily& family, const DataRef& data,
                          std::optional<GpsParams> init, const FitOptions& opts) {
    const bool degenerate =
        family.kind() == FamilyKind::polynomial && family.terms().size() == 1 &&
        family.min_power() == 1;
    const bool extended = family.kind() == FamilyKind::geometric &&
                          !opts.classic_geometric && !degenerate;
    const ThetaMap map = theta_map_for(family, extended, degenerate);

    FitDiagnostics diag;
    if (init) {
        GpsParams start = *init;
        start.family = family;
        if (extended && !start.extended_gg) start.extended_gg = true;
        start.validate();
        const NewtonState st = newton_maximize(family, data, start, map, opts, diag);
        return finish_fit(family, data, st, diag, "direct-newton");
    }
    const GompertzParams g0 = gompertz_profile_fit(*data.xs, data.indicators);
    NewtonState best;
    FitDiagnostics best_diag;
    bool have_best = false;
    for (const double gscale : {1.0, 2.0}) {
        // the compound's early-failure mass biases the marginal Gompertz
        // shape estimate low, so a doubled-gamma start covers that basin
        for (const double theta0 : theta_starts(map)) {
            FitDiagnostics d = diag;
            const GpsParams start =
                start_at(family, g0.gamma * gscale, theta0, map, extended, d, data);
            const NewtonState st = newton_maximize(family, data, start, map, opts, d);
            if (!have_best || st.ll > best.ll) {
                best = st;
                best_diag = d;
                have_best = true;
            }
        }
    }
    return finish_fit(family, data, best, best_diag, "direct-newton");
}

}  // namespace

FitResult mle_direct(const PowerSeriesFamily& family, const ObservedSample& data,
                     std::optional<GpsParams> init, const FitOptions& opts) {
    data.validate();
    return mle_direct_impl(family, DataRef{&data.values, nullptr}, std::move(init), opts);
}

FitResult mle_direct(const PowerSeriesFamily& family, const CensoredSample& data,
                     std::optional<GpsParams> init, const FitOptions& opts) {
    data.validate();
    return mle_direct_impl(family, DataRef{&data.values, &data.indicators}, std::move(init),
                           opts);
}

namespace {

struct EmRun {
    GpsParams params{1.0, 1.0, 0.5, PowerSeriesFamily::geometric(), false};
    std::vector<double> loglik_trace;
    int iterations = 0;
    bool converged = false;
};

EmRun em_run(const PowerSeriesFamily& family, const ObservedSample& data, GpsParams p,
             double stop_tol, int max_iter, bool accelerate = false) {
    const auto& xs = data.values;
    const std::size_t n = xs.size();
    const bool degenerate =
        family.kind() == FamilyKind::polynomial && family.terms().size() == 1 &&
        family.min_power() == 1;

    const double theta_lo = 1e-12;
    const double theta_hi_domain =
        std::isfinite(family.theta_sup()) ? family.theta_sup() - 1e-12 : 1e12;
    double xbar = 0.0;
    for (double x : xs) xbar += x / n;

    EmRun run;
    run.loglik_trace.push_back(log_likelihood(p, data));

    std::vector<double> z(n);
    std::array<Vec3, 3> hist{};
    bool converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
        // E-step
        for (std::size_t i = 0; i < n; ++i) {
            const double u = p.theta * gompertz_tail(p.base(), xs[i]);
            z[i] = 1.0 + u * family.A2(u);
        }
        double zbar = 0.0;
        for (double zi : z) zbar += zi / n;

        // M-step, theta: theta C'(theta)/C(theta) = zbar
        double theta_new;
        if (!degenerate) {
            auto mean_gap = [&](double th) { return family.mean_N(th) - zbar; };
            double hi = theta_hi_domain;
            if (!std::isfinite(family.theta_sup())) {
                hi = std::max(1.0, p.theta);
                while (mean_gap(hi) < 0.0 && hi < 1e12) hi *= 2.0;
            }
            if (mean_gap(theta_lo) >= 0.0) theta_new = theta_lo;
            else if (mean_gap(hi) <= 0.0) theta_new = hi;
            else theta_new = solve_root(mean_gap, theta_lo, hi, mean_gap(theta_lo),
                                        mean_gap(hi));
        } else {
            theta_new = p.theta;
        }

        // M-step, gamma: profile equation
        // xbar + 1/g = sum z x e^{gx} / sum z (e^{gx} - 1)
        auto phi_pair = [&](double gm, double& phi, double& dphi) {
            double num = 0.0, num_dx = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e = std::exp(gm * xs[i]);
                num += z[i] * xs[i] * e;
                num_dx += z[i] * xs[i] * xs[i] * e;
                den += z[i] * gompertz_exponent(gm, xs[i]) * gm;
            }
            phi = xbar + 1.0 / gm - num / den;
            dphi = -1.0 / (gm * gm) - (num_dx * den - num * num) / (den * den);
        };
        // Newton from the previous gamma (late iterations land in 2-3 steps);
        // bracketed false position as the safety net
        double gamma_new = p.gamma;
        bool newton_ok = false;
        for (int k = 0; k < 30; ++k) {
            double f, df;
            phi_pair(gamma_new, f, df);
            if (std::abs(f) < 1e-12 * (1.0 + xbar)) {
                newton_ok = true;
                break;
            }
            const double step = f / df;
            const double next = gamma_new - step;
            if (!(next > 0.0) || !(next < 1e8) || !std::isfinite(next)) break;
            if (std::abs(step) < 1e-14 * gamma_new) {
                gamma_new = next;
                newton_ok = true;
                break;
            }
            gamma_new = next;
        }
        if (!newton_ok) {
            auto phi = [&](double gm) {
                double f, df;
                phi_pair(gm, f, df);
                return f;
            };
            double glo = 1e-8, ghi = std::max(1.0, p.gamma);
            double fhi = phi(ghi);
            while (fhi > 0.0 && ghi < 1e8) { ghi *= 2.0; fhi = phi(ghi); }
            const double flo = phi(glo);
            if (flo <= 0.0) gamma_new = glo;
            else if (fhi >= 0.0) gamma_new = ghi;
            else gamma_new = solve_root(phi, glo, ghi, flo, fhi);
        }

        // M-step, beta: closed form given gamma
        double K = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            K += z[i] * gompertz_exponent(gamma_new, xs[i]);
        const double beta_new = n / K;

        const double diff = std::max({std::abs(beta_new - p.beta),
                                      std::abs(gamma_new - p.gamma),
                                      std::abs(theta_new - p.theta)});
        p.beta = beta_new;
        p.gamma = gamma_new;
        p.theta = theta_new;
        run.loglik_trace.push_back(log_likelihood(p, data));
        if (diff < stop_tol) {
            converged = true;
            ++it;
            break;
        }
        if (accelerate) {
            // guarded Aitken jump along the EM path; accepted only when the
            // log-likelihood does not drop, so the ascent property survives.
            // Without it the crawl along a flat (beta, theta) ridge can need
            // far more iterations than any reasonable budget.
            hist[it % 3] = {p.beta, p.gamma, p.theta};
            if (it >= 2 && it % 3 == 2) {
                const Vec3& a = hist[0];
                const Vec3& b = hist[1];
                const Vec3& c = hist[2];
                GpsParams cand = p;
                Vec3 acc{};
                bool usable = true;
                for (int k = 0; k < 3; ++k) {
                    const double d1 = b[k] - a[k], d2 = c[k] - b[k];
                    const double denom = d2 - d1;
                    acc[k] = std::abs(denom) > 1e-14 * (1.0 + std::abs(c[k]))
                                 ? c[k] - d2 * d2 / denom
                                 : c[k];
                    usable &= std::isfinite(acc[k]);
                }
                cand.beta = acc[0];
                cand.gamma = acc[1];
                cand.theta = acc[2];
                if (usable && cand.beta > 0.0 && cand.gamma > 0.0) {
                    const double ll_acc = log_likelihood(cand, data);
                    if (std::isfinite(ll_acc) && ll_acc >= run.loglik_trace.back()) {
                        p = cand;
                        run.loglik_trace.push_back(ll_acc);
                    }
                }
            }
        }
    }
    run.params = p;
    run.iterations = it;
    run.converged = converged;
    return run;
}

}  // namespace

FitResult em_fit(const PowerSeriesFamily& family, const ObservedSample& data,
                 std::optional<GpsParams> init, const EmOptions& opts) {
    data.validate();
    const DataRef ref{&data.values, nullptr};
    const auto& xs = data.values;
    const bool degenerate =
        family.kind() == FamilyKind::polynomial && family.terms().size() == 1 &&
        family.min_power() == 1;
    const ThetaMap map = theta_map_for(family, false, degenerate);
    const double theta_hi_domain =
        std::isfinite(family.theta_sup()) ? family.theta_sup() - 1e-12 : 1e12;

    FitDiagnostics diag;
    EmRun best;
    bool have_best = false;
    if (init) {
        GpsParams p = *init;
        p.family = family;
        p.extended_gg = false;
        p.validate();
        best = em_run(family, data, p, opts.report_tol, opts.max_iter);
        const EmRun polish =
            em_run(family, data, best.params, opts.polish_tol, 4 * opts.max_iter, true);
        best.params = polish.params;
        best.iterations += polish.iterations;
        best.loglik_trace.insert(best.loglik_trace.end(),
                                 polish.loglik_trace.begin() + 1,
                                 polish.loglik_trace.end());
        have_best = true;
    } else {
        // stage 1: every start to the 1e-4 successive-difference rule;
        // stage 2: the winner alone is polished so EM and Newton agree
        const GompertzParams g0 = gompertz_profile_fit(xs, nullptr);
        for (const double gscale : {1.0, 2.0}) {
            for (const double theta0 : theta_starts(map)) {
                FitDiagnostics d = diag;
                const GpsParams start =
                    start_at(family, g0.gamma * gscale, theta0, map, false, d, ref);
                const EmRun run =
                    em_run(family, data, start, opts.report_tol, opts.max_iter);
                if (!have_best || run.loglik_trace.back() > best.loglik_trace.back()) {
                    best = run;
                    diag = d;
                    have_best = true;
                }
            }
        }
        // convergence is the paper-rule stage; the polish is best-effort
        const EmRun polish = em_run(family, data, best.params, opts.polish_tol,
                                    4 * opts.max_iter, true);
        best.params = polish.params;
        best.iterations += polish.iterations;
        best.loglik_trace.insert(best.loglik_trace.end(),
                                 polish.loglik_trace.begin() + 1,
                                 polish.loglik_trace.end());
    }

    const GpsParams p = best.params;
    diag.boundary_gompertz = !degenerate && p.theta <= 1e-6;
    diag.boundary_upper = !degenerate && p.theta >= theta_hi_domain * (1.0 - 1e-9);
    diag.flags = existence_flags(p, xs);

    FitResult fit;
    fit.method = "em";
    fit.params = p;
    fit.loglik_trace = best.loglik_trace;
    fit.loglik = best.loglik_trace.back();
    fit.iterations = best.iterations;
    fit.converged = best.converged;
    fit.n_free = degenerate ? 2 : 3;
    fit.diagnostics = diag;
    fit.info = louis_information(p, data);
    fit.std_errors = {kNan, kNan, kNan};
    const bool theta_fixed = fit.n_free == 2 || diag.boundary_gompertz;
    try {
        if (!theta_fixed) {
            const Mat3 inv = invert3(fit.info);
            bool ok = true;
            for (int i = 0; i < 3; ++i) ok &= inv[i][i] > 0.0;
            if (!ok) throw std::runtime_error("louis information not positive definite");
            for (int i = 0; i < 3; ++i) fit.std_errors[i] = std::sqrt(inv[i][i]);
            fit.se_available = true;
        } else {
            const auto& m = fit.info;
            const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if (det <= 0.0) throw std::runtime_error("2x2 information singular");
            fit.std_errors[0] = std::sqrt(m[1][1] / det);
            fit.std_errors[1] = std::sqrt(m[0][0] / det);
            fit.se_available = true;
        }
    } catch (const std::exception&) {
        fit.se_available = false;
    }
    return fit;
}

std::array<ConfidenceInterval, 3> confidence_intervals(const FitResult& fit, double level) {
    if (!(level > 0.0) || !(level < 1.0))
        throw std::domain_error("confidence_intervals: level in (0,1)");
    if (!fit.se_available)
        throw std::runtime_error("confidence_intervals: standard errors unavailable");
    const double z = normal_quantile(0.5 * (1.0 + level));
    const Vec3 hat{fit.params.beta, fit.params.gamma, fit.params.theta};
    std::array<ConfidenceInterval, 3> out;
    for (int i = 0; i < 3; ++i) {
        const double half = z * fit.std_errors[i];
        out[i] = {hat[i] - half, hat[i] + half};
    }
    return out;
}

}  // namespace gps
