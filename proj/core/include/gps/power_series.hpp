#ifndef GPS_POWER_SERIES_HPP
#define GPS_POWER_SERIES_HPP

#include <string>
#include <utility>
#include <vector>

namespace gps {

enum class FamilyKind { geometric, poisson, binomial, logarithmic, polynomial };

/// A zero-truncated power series distribution: P(N=n) = a_n theta^n / C(theta)
/// with C(theta) = sum_{n>=1} a_n theta^n on the open domain (0, theta_sup).
///
/// The four named presets (geometric, poisson, binomial, logarithmic) use
/// closed forms for C and its derivatives; user-defined families are sparse
/// polynomials sum a_n theta^n with a_n > 0, evaluated term-wise.
class PowerSeriesFamily {
public:
    using Term = std::pair<int, double>;  // (n, a_n), n >= 1, a_n > 0

    static PowerSeriesFamily geometric();
    static PowerSeriesFamily poisson();
    static PowerSeriesFamily binomial(int m);
    static PowerSeriesFamily logarithmic();
    static PowerSeriesFamily polynomial(std::vector<Term> terms);

    // Accepts "geometric", "poisson", "binomial(m)", "logarithmic", or a
    // sparse polynomial spec "n1:a1,n2:a2,...".
    static PowerSeriesFamily parse(const std::string& spec);

    FamilyKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    // Supremum of the open theta domain (0, s); +infinity when unbounded.
    double theta_sup() const { return theta_sup_; }
    int binomial_m() const { return m_; }
    const std::vector<Term>& terms() const { return terms_; }
    // Smallest n with a_n > 0 (1 for all presets).
    int min_power() const { return min_power_; }

    bool contains(double theta) const;
    void require_theta(double theta) const;  // throws std::domain_error

    // C(theta), C'(theta), C''(theta), C'''(theta); order in 0..3.
    double C(double theta, int order = 0) const;
    double log_C(double theta) const;
    // log C'(u); u = theta * tail may be any value < theta_sup on the
    // extended-geometric branch, where the closed form stays valid.
    double log_Cprime(double u) const;

    // Inverse of C on the theta domain; closed form for presets, bracketed
    // bisection (relative tolerance 1e-12) for polynomial families.
    double inverse_C(double y) const;

    double coeff(int n) const;      // a_n (0 when absent)
    double log_coeff(int n) const;  // log a_n (-inf when absent)
    double pmf(double theta, int n) const;
    // E(N) = theta C'(theta) / C(theta), computed as 1 - theta*D1(theta).
    double mean_N(double theta) const;

    // Ratio helpers used throughout the likelihood machinery. All are
    // cancellation-safe near theta -> 0 and, for the geometric family,
    // remain valid for theta < 0 (the extended-GG branch).
    double A1(double u) const;  // C'(u)/C(u)
    double A2(double u) const;  // C''(u)/C'(u)
    double A3(double u) const;  // C'''(u)/C'(u)
    double D1(double theta) const;  // 1/theta - C'(theta)/C(theta)
    double D2(double theta) const;  // d/dtheta D1 = -1/theta^2 - C''/C + (C'/C)^2
    double log_theta_over_C(double theta) const;  // log(theta / C(theta))
    // C(theta*t)/C(theta) for t in (0,1]; the GPS survival kernel.
    double survival_ratio(double theta, double t) const;

    // E(Z|x) and Var(Z|x) of the latent count given u = theta * tail.
    double posterior_mean_Z(double u) const { return 1.0 + u * A2(u); }
    double posterior_var_Z(double u) const;

private:
    PowerSeriesFamily(FamilyKind kind, std::string name, double sup, int m,
                      std::vector<Term> terms);

    FamilyKind kind_;
    std::string name_;
    double theta_sup_;
    int m_ = 0;                 // binomial only
    std::vector<Term> terms_;   // polynomial only, sorted by n
    int min_power_ = 1;

    double poly_sum(double theta, int order) const;
};

}  // namespace gps

#endif
