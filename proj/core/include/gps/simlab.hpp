#ifndef GPS_SIMLAB_HPP
#define GPS_SIMLAB_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gps/estimation.hpp"

namespace gps {

/// Model selector shared by the CLI and study configs:
/// gompertz | gg | gg-classic | gp | gb(m) | gl | poly(n1:a1,n2:a2,...)
struct ModelSpec {
    std::string label;
    PowerSeriesFamily family;
    bool classic_geometric = false;
    int free_params() const;
    static ModelSpec parse(const std::string& text);
};

struct StudyConfig {
    enum class Mode { estimation, misspecification };
    enum class Method { em, direct };

    Mode mode = Mode::estimation;
    std::string family_spec = "gg-classic";
    double beta = 0.5, gamma = 2.0, theta = 0.9;
    std::vector<int> sample_sizes{30, 50, 100, 200};
    int replicates = 1000;
    Method method = Method::em;
    double censoring_fraction = 0.0;
    std::uint64_t seed = 20240915;
    std::vector<std::string> competitors;  // misspecification mode
    int threads = 0;                       // 0 = hardware concurrency

    void validate() const;
    static StudyConfig from_file(const std::string& path);  // key=value lines
};

/// Per-(n, truth) cell of an estimation study. Vectors are indexed
/// (beta, gamma, theta); MSE and VS use the 1/R normalization so
/// MSE = VS + (AE - truth)^2 holds exactly.
struct CellReport {
    int n = 0;
    Vec3 truth{};
    Vec3 ae{}, mse{}, vs{}, ef{}, cp{};
    int attempted = 0;
    int used = 0;
    double convergence_rate = 0.0;
    double censoring_lambda = 0.0;  // exponential censoring rate (0 = none)
};

struct MisspecCell {
    int n = 0;
    std::vector<std::string> competitors;
    std::vector<std::array<int, 3>> counts;  // per competitor: {AIC, AICC, BIC}
    int replicates_used = 0;
};

struct StudyReport {
    StudyConfig config;
    std::vector<CellReport> cells;
    std::vector<MisspecCell> misspec;

    std::string to_csv() const;
    std::string to_text() const;
};

StudyReport run_estimation_study(const StudyConfig& config);
StudyReport run_misspecification_study(const StudyConfig& config);
StudyReport run_study(const StudyConfig& config);  // dispatch on config.mode

/// Exponential censoring rate lambda with P(X > C) = fraction.
double calibrate_censoring_rate(const GpsParams& params, double fraction);

/// Draw X_i ~ GPS and C_i ~ Exp(lambda) with lambda calibrated to the target
/// fraction; returns (min(X_i, C_i), delta_i). The X stream is the one
/// sample() produces for the same seed.
CensoredSample generate_censored_sample(const GpsParams& params, std::size_t n,
                                        double censoring_fraction, std::uint64_t seed);

}  // namespace gps

#endif
