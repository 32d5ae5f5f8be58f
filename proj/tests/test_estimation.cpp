#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gps/datasets.hpp"
#include "gps/estimation.hpp"
#include "gps/moments.hpp"
#include "test_support.hpp"

using namespace gps;

namespace {

struct Instance {
    GpsParams params;
    ObservedSample data;
};

std::vector<Instance> random_instances(int count, std::uint64_t seed) {
    testutil::Stream s(seed);
    const PowerSeriesFamily families[] = {
        PowerSeriesFamily::geometric(), PowerSeriesFamily::poisson(),
        PowerSeriesFamily::binomial(5), PowerSeriesFamily::logarithmic(),
        PowerSeriesFamily::polynomial({{1, 1.0}, {20, 1.0}})};
    std::vector<Instance> out;
    for (int i = 0; i < count; ++i) {
        const auto& family = families[i % 5];
        const double sup = std::isfinite(family.theta_sup()) ? family.theta_sup() : 4.0;
        GpsParams p{s.uniform(0.1, 1.5), s.uniform(0.4, 3.0), s.uniform(0.1, 0.9) * sup,
                    family, false};
        ObservedSample data{sample(p, 40, 1000 + i)};
        out.push_back({p, std::move(data)});
    }
    return out;
}

Vec3 fd_score(const GpsParams& p, const ObservedSample& data) {
    auto at = [&](double b, double g, double t) {
        GpsParams q = p;
        q.beta = b;
        q.gamma = g;
        q.theta = t;
        return log_likelihood(q, data);
    };
    const double hb = 1e-6 * p.beta, hg = 1e-6 * p.gamma,
                 ht = 1e-6 * std::max(std::abs(p.theta), 0.1);
    return {(at(p.beta + hb, p.gamma, p.theta) - at(p.beta - hb, p.gamma, p.theta)) /
                (2 * hb),
            (at(p.beta, p.gamma + hg, p.theta) - at(p.beta, p.gamma - hg, p.theta)) /
                (2 * hg),
            (at(p.beta, p.gamma, p.theta + ht) - at(p.beta, p.gamma, p.theta - ht)) /
                (2 * ht)};
}

Mat3 fd_hessian(const std::function<double(const Vec3&)>& f, const Vec3& at,
                const Vec3& h) {
    Mat3 out;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            Vec3 pp = at, pm = at, mp = at, mm = at;
            pp[i] += h[i]; pp[j] += h[j];
            pm[i] += h[i]; pm[j] -= h[j];
            mp[i] -= h[i]; mp[j] += h[j];
            mm[i] -= h[i]; mm[j] -= h[j];
            out[i][j] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("log-likelihood equals the sum of log densities") {
    for (const auto& [p, data] : random_instances(20, 5)) {
        double direct = 0.0;
        for (double x : data.values) direct += log_pdf(p, x);
        CHECK(log_likelihood(p, data) == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("degenerate family reduces to the Gompertz log-likelihood") {
    const GpsParams p{0.7, 1.9, 1.0, PowerSeriesFamily::polynomial({{1, 1.0}}), false};
    ObservedSample data{sample(p, 30, 4)};
    double direct = 0.0;
    for (double x : data.values) direct += std::log(gompertz_pdf(p.base(), x));
    CHECK(log_likelihood(p, data) == doctest::Approx(direct).epsilon(1e-12));
    // and its theta-score vanishes identically
    CHECK(score(p, data)[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
}

TEST_CASE("out-of-domain parameters give the -inf sentinel") {
    ObservedSample data{{0.5, 1.0, 1.5}};
    GpsParams p{1.0, 1.0, 0.5, PowerSeriesFamily::geometric(), false};
    p.theta = 1.2;
    CHECK(log_likelihood(p, data) == -std::numeric_limits<double>::infinity());
    p.theta = 0.5;
    p.beta = -1.0;
    CHECK(log_likelihood(p, data) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("score matches finite differences on random instances") {
    for (const auto& [p, data] : random_instances(50, 99)) {
        const Vec3 analytic = score(p, data);
        const Vec3 numeric = fd_score(p, data);
        for (int i = 0; i < 3; ++i)
            CHECK(analytic[i] ==
                  doctest::Approx(numeric[i]).epsilon(1e-5).scale(std::abs(numeric[i]) + 1.0));
    }
}

TEST_CASE("extended-GG score matches finite differences at negative theta") {
    const GpsParams p{0.8, 1.3, -20.0, PowerSeriesFamily::geometric(), true};
    ObservedSample data{sample(p, 50, 321)};
    const Vec3 analytic = score(p, data);
    const Vec3 numeric = fd_score(p, data);
    for (int i = 0; i < 3; ++i)
        CHECK(analytic[i] ==
              doctest::Approx(numeric[i]).epsilon(1e-5).scale(std::abs(numeric[i]) + 1.0));
}

TEST_CASE("observed information matches the finite-difference Hessian") {
    for (const auto& [p, data] : random_instances(10, 202)) {
        auto f = [&](const Vec3& v) {
            GpsParams q = p;
            q.beta = v[0];
            q.gamma = v[1];
            q.theta = v[2];
            return log_likelihood(q, data);
        };
        const Vec3 at{p.beta, p.gamma, p.theta};
        const Vec3 h{1e-4 * p.beta, 1e-4 * p.gamma, 1e-4 * std::max(p.theta, 0.1)};
        const Mat3 numeric = fd_hessian(f, at, h);
        const Mat3 info = observed_information(p, data);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(info[i][j] == doctest::Approx(-numeric[i][j])
                                        .epsilon(1e-4)
                                        .scale(std::abs(numeric[i][j]) + 1.0));
        // symmetry is structural
        CHECK(info[0][1] == info[1][0]);
        CHECK(info[0][2] == info[2][0]);
        CHECK(info[1][2] == info[2][1]);
    }
}

TEST_CASE("censored likelihood: all-events reduction and monotonicity") {
    for (const auto& [p, data] : random_instances(6, 404)) {
        CensoredSample cens{data.values, std::vector<int>(data.values.size(), 1)};
        CHECK(censored_log_likelihood(p, cens) ==
              doctest::Approx(log_likelihood(p, data)).epsilon(1e-12));
    }
    // log S decreasing in a censored observation's value
    const GpsParams p{0.5, 2.0, 0.9, PowerSeriesFamily::geometric(), false};
    CensoredSample cens{{0.5, 0.8, 1.0}, {1, 1, 0}};
    const double base = censored_log_likelihood(p, cens);
    cens.values[2] = 1.4;
    CHECK(censored_log_likelihood(p, cens) < base);
}

TEST_CASE("censored score and information match finite differences") {
    testutil::Stream s(7);
    for (int rep = 0; rep < 10; ++rep) {
        const PowerSeriesFamily family =
            rep % 2 ? PowerSeriesFamily::poisson() : PowerSeriesFamily::geometric();
        const double sup = std::isfinite(family.theta_sup()) ? family.theta_sup() : 3.0;
        GpsParams p{s.uniform(0.2, 1.2), s.uniform(0.5, 2.5), s.uniform(0.2, 0.9) * sup,
                    family, false};
        auto xs = sample(p, 40, 9000 + rep);
        std::vector<int> ind(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) ind[i] = (i % 3 == 0) ? 0 : 1;
        CensoredSample data{xs, ind};

        auto f = [&](const Vec3& v) {
            GpsParams q = p;
            q.beta = v[0];
            q.gamma = v[1];
            q.theta = v[2];
            return censored_log_likelihood(q, data);
        };
        const Vec3 at{p.beta, p.gamma, p.theta};
        const Vec3 analytic = censored_score(p, data);
        for (int i = 0; i < 3; ++i) {
            Vec3 hp = at, hm = at;
            const double h = 1e-6 * std::max(std::abs(at[i]), 0.1);
            hp[i] += h;
            hm[i] -= h;
            const double numeric = (f(hp) - f(hm)) / (2.0 * h);
            CHECK(analytic[i] ==
                  doctest::Approx(numeric).epsilon(1e-5).scale(std::abs(numeric) + 1.0));
        }
        const Vec3 h{1e-4 * p.beta, 1e-4 * p.gamma, 1e-4 * std::max(p.theta, 0.1)};
        const Mat3 numeric = fd_hessian(f, at, h);
        const Mat3 info = censored_observed_information(p, data);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(info[i][j] == doctest::Approx(-numeric[i][j])
                                        .epsilon(1e-4)
                                        .scale(std::abs(numeric[i][j]) + 1.0));
    }
}

TEST_CASE("beta bracket sign-changes the beta score") {
    testutil::Stream s(31);
    for (int rep = 0; rep < 20; ++rep) {
        const PowerSeriesFamily family =
            rep % 2 ? PowerSeriesFamily::geometric() : PowerSeriesFamily::poisson();
        const double sup = std::isfinite(family.theta_sup()) ? family.theta_sup() : 3.0;
        const double gamma = s.uniform(0.5, 2.5);
        const double theta = s.uniform(0.1, 0.9) * sup;
        GpsParams gen{s.uniform(0.2, 1.0), gamma, theta, family, false};
        const auto xs = sample(gen, 30, 5000 + rep);

        const BetaBracket bracket = beta_bracket(gamma, theta, family, xs);
        CHECK(bracket.lo < bracket.hi);
        auto g1 = [&](double beta) {
            GpsParams p{beta, gamma, theta, family, false};
            return score(p, ObservedSample{xs})[0];
        };
        CHECK(g1(bracket.lo) > 0.0);
        CHECK(g1(bracket.hi) < 0.0);
    }
}

TEST_CASE("beta bracket collapses for the degenerate family") {
    const auto family = PowerSeriesFamily::polynomial({{1, 1.0}});
    const std::vector<double> xs{0.4, 0.9, 1.7};
    const BetaBracket b = beta_bracket(1.2, 1.0, family, xs);
    CHECK(b.lo == doctest::Approx(b.hi));
    // the collapsed point is the Gompertz profile root
    double K = 0.0;
    for (double x : xs) K += std::expm1(1.2 * x) / 1.2;
    CHECK(b.hi == doctest::Approx(3.0 / K));
}

TEST_CASE("existence flags") {
    // all x -> 0+ gives t -> 1: theorem-3 flag holds
    GpsParams p{0.5, 1.0, 0.5, PowerSeriesFamily::geometric(), false};
    CHECK(existence_flags(p, {1e-6, 2e-6, 3e-6}).theta_root);
    // GB second condition is vacuously true for m > 1 (negative rhs)
    GpsParams gb{0.5, 1.0, 1.0, PowerSeriesFamily::binomial(5), false};
    CHECK(existence_flags(gb, {0.5, 1.0}).theta_root_second);
    // simulated GG(0.5, 2, 0.9), n = 200: flag true in >= 95% of 200 replicates
    GpsParams gg{0.5, 2.0, 0.9, PowerSeriesFamily::geometric(), false};
    int hold = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto xs = sample(gg, 200, 40000 + rep);
        hold += existence_flags(gg, xs).theta_root ? 1 : 0;
    }
    CHECK(hold >= 190);
}

TEST_CASE("louis pieces: I_m is PSD and the zero pattern holds for C(theta)=theta") {
    // degenerate family: Var(Z|x) = 0 so I_m = 0 and I_c has c13 = c23 = 0
    const GpsParams gomp{0.7, 1.4, 1.0, PowerSeriesFamily::polynomial({{1, 1.0}}), false};
    ObservedSample data{sample(gomp, 25, 66)};
    const Mat3 im = missing_information(gomp, data);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(im[i][j] == doctest::Approx(0.0).scale(1.0));
    const Mat3 ic = complete_information(gomp, data);
    CHECK(ic[0][2] == 0.0);
    CHECK(ic[1][2] == 0.0);

    // PSD of I_m at random points: x' I_m x >= 0 for a few directions
    testutil::Stream s(8);
    for (const auto& [p, d] : random_instances(20, 313)) {
        const Mat3 m = missing_information(p, d);
        for (int k = 0; k < 8; ++k) {
            const Vec3 v{s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0)};
            double quad = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) quad += v[i] * m[i][j] * v[j];
            CHECK(quad >= -1e-9 * (1.0 + std::abs(quad)));
        }
    }
}

TEST_CASE("louis identity: I_c - I_m equals the appendix information") {
    // identity holds at any parameter point, not only the MLE
    for (const auto& [p, data] : random_instances(20, 515)) {
        const Mat3 louis = louis_information(p, data);
        const Mat3 direct = observed_information(p, data);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(louis[i][j] == doctest::Approx(direct[i][j])
                                         .epsilon(1e-3)
                                         .scale(std::abs(direct[i][j]) + 1.0));
    }
}

TEST_CASE("glass-fibre data is embedded verbatim") {
    const auto& data = glass_fibre_strengths();
    CHECK(data.size() == 63);
    CHECK(data.front() == 0.55);
    CHECK(data.back() == 1.89);
    double sum = 0.0;
    for (double v : data) sum += v;
    CHECK(sum == doctest::Approx(94.93).epsilon(1e-12));
}
