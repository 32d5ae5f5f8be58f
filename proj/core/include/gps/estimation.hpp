#ifndef GPS_ESTIMATION_HPP
#define GPS_ESTIMATION_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gps/distribution.hpp"

namespace gps {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

struct ObservedSample {
    std::vector<double> values;
    void validate() const;  // nonempty, all > 0
};

struct CensoredSample {
    std::vector<double> values;
    std::vector<int> indicators;  // 1 = event, 0 = right-censored
    void validate() const;        // equal lengths, at least one event
    std::size_t n_events() const;
};

/// Per-observation terms shared by the score and the observed information:
/// t_i = e^{-(beta/gamma)(e^{gamma x_i}-1)}, d_i = d log t_i / d gamma,
/// b_i = t_i d_i, q_i = d d_i / d gamma, and the C-derivative ratios at
/// u_i = theta t_i. Rebuilt whenever the parameters change.
struct ScoreWorkspace {
    std::vector<double> x, log_t, t, d, b, q, u, a1, a2, a3;
    double d1 = 0.0, d2 = 0.0;  // family-level: D1(theta), d D1 / d theta
    static ScoreWorkspace build(const GpsParams& p, const std::vector<double>& xs,
                                bool with_a1 = false);
};

// Log-likelihoods return -infinity when the parameters leave the family
// domain, so optimizers reject the point instead of aborting.
double log_likelihood(const GpsParams& p, const ObservedSample& data);
double censored_log_likelihood(const GpsParams& p, const CensoredSample& data);

Vec3 score(const GpsParams& p, const ObservedSample& data);
Vec3 censored_score(const GpsParams& p, const CensoredSample& data);

/// Observed information I_n = -Hessian of the log-likelihood, assembled from
/// the analytic second-derivative expressions.
Mat3 observed_information(const GpsParams& p, const ObservedSample& data);
Mat3 censored_observed_information(const GpsParams& p, const CensoredSample& data);

/// Louis decomposition I_c - I_m of the observed information from the
/// complete-data EM quantities E(Z|x) and Var(Z|x).
Mat3 louis_information(const GpsParams& p, const ObservedSample& data);
Mat3 complete_information(const GpsParams& p, const ObservedSample& data);  // I_c
Mat3 missing_information(const GpsParams& p, const ObservedSample& data);   // I_m

/// Interval guaranteed to contain a root of the beta score at fixed
/// (gamma, theta): ( n / [(theta C''/C' + 1) K], n / K ) with
/// K = sum (e^{gamma x_i}-1)/gamma.
struct BetaBracket {
    double lo, hi;
    double midpoint() const { return 0.5 * (lo + hi); }
};
BetaBracket beta_bracket(double gamma, double theta, const PowerSeriesFamily& family,
                         const std::vector<double>& xs);

/// Root-existence diagnostics. Never abort a fit; they are reported only.
struct ExistenceFlags {
    bool gamma_root = false;        // n xbar - (beta/2) sum x^2 (1 + u C''/C') > 0
    bool theta_root = false;        // sum t_i > n/2
    bool theta_root_second = true;  // binomial only: sum 1/t_i > n m/(1-m)
};
ExistenceFlags existence_flags(const GpsParams& p, const std::vector<double>& xs);

struct FitDiagnostics {
    ExistenceFlags flags;
    bool boundary_gompertz = false;  // theta ran below 1e-6; model collapsed
    bool boundary_upper = false;     // theta pinned at the upper domain edge
    bool used_direct_search = false; // Newton gave up, Nelder-Mead finished
    BetaBracket init_bracket{0.0, 0.0};
};

struct FitResult {
    GpsParams params{1.0, 1.0, 0.5, PowerSeriesFamily::geometric(), false};
    Vec3 std_errors{0.0, 0.0, 0.0};
    bool se_available = false;
    Mat3 info{};  // matrix the standard errors came from
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string method;  // "direct-newton" | "em"
    int n_free = 3;      // 2 when the family is degenerate (plain Gompertz)
    FitDiagnostics diagnostics;
    std::vector<double> loglik_trace;
};

struct FitOptions {
    double score_tol = 1e-8;
    double step_tol = 1e-10;
    int max_iter = 500;
    bool classic_geometric = false;  // constrain GG to theta in (0,1)
};

FitResult mle_direct(const PowerSeriesFamily& family, const ObservedSample& data,
                     std::optional<GpsParams> init = std::nullopt,
                     const FitOptions& opts = {});
FitResult mle_direct(const PowerSeriesFamily& family, const CensoredSample& data,
                     std::optional<GpsParams> init = std::nullopt,
                     const FitOptions& opts = {});

struct EmOptions {
    double report_tol = 1e-4;  // successive-estimate rule used for iteration counts
    double polish_tol = 1e-8;  // keep iterating to here so EM and Newton agree
    int max_iter = 5000;
};

/// Complete-data EM: E-step z_i = 1 + u C''(u)/C'(u); M-step solves the
/// complete-data score exactly (beta profiled out of the gamma equation,
/// theta from theta C'(theta)/C(theta) = zbar).
FitResult em_fit(const PowerSeriesFamily& family, const ObservedSample& data,
                 std::optional<GpsParams> init = std::nullopt,
                 const EmOptions& opts = {});

struct ConfidenceInterval {
    double lo, hi;
};
std::array<ConfidenceInterval, 3> confidence_intervals(const FitResult& fit,
                                                       double level);

/// Two-parameter Gompertz MLE: exact profile of beta given gamma plus a 1-D
/// search in gamma. Used on its own and as the GPS initializer.
GompertzParams gompertz_profile_fit(const std::vector<double>& xs,
                                    const std::vector<int>* indicators = nullptr);

// small dense helpers
Vec3 solve3(const Mat3& a, const Vec3& b);
Mat3 invert3(const Mat3& a);
bool cholesky3(const Mat3& a, Mat3& lower);

}  // namespace gps

#endif
