#include "gps/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gps/gof.hpp"
#include "gps/moments.hpp"
#include "gps/quadrature.hpp"
#include "gps/random.hpp"

namespace gps {

// ----------------------------------------------------------------- specs

int ModelSpec::free_params() const {
    return family.kind() == FamilyKind::polynomial && family.terms().size() == 1 &&
                   family.min_power() == 1
               ? 2
               : 3;
}

ModelSpec ModelSpec::parse(const std::string& text) {
    if (text == "gompertz")
        return {text, PowerSeriesFamily::polynomial({{1, 1.0}}), false};
    if (text == "gg") return {text, PowerSeriesFamily::geometric(), false};
    if (text == "gg-classic") return {text, PowerSeriesFamily::geometric(), true};
    if (text == "gp") return {text, PowerSeriesFamily::poisson(), false};
    if (text == "gl") return {text, PowerSeriesFamily::logarithmic(), false};
    if (text.rfind("gb(", 0) == 0 && text.back() == ')')
        return {text, PowerSeriesFamily::parse("binomial" + text.substr(2)), false};
    if (text.rfind("poly(", 0) == 0 && text.back() == ')')
        return {text, PowerSeriesFamily::parse(text.substr(5, text.size() - 6)), false};
    // fall through to the raw family language (geometric, binomial(m), "1:1,20:1", ...)
    return {text, PowerSeriesFamily::parse(text), false};
}

// ---------------------------------------------------------------- config

void StudyConfig::validate() const {
    if (replicates < 1) throw std::invalid_argument("StudyConfig: replicates >= 1");
    if (!(censoring_fraction >= 0.0) || censoring_fraction >= 1.0)
        throw std::invalid_argument("StudyConfig: censoring_fraction in [0,1)");
    if (sample_sizes.empty()) throw std::invalid_argument("StudyConfig: no sample sizes");
    if (mode == Mode::misspecification && competitors.empty())
        throw std::invalid_argument("StudyConfig: misspecification mode needs competitors");
    if (mode == Mode::estimation && censoring_fraction > 0.0 && method == Method::em)
        throw std::invalid_argument("StudyConfig: EM handles complete data only");
    (void)ModelSpec::parse(family_spec);
}

StudyConfig StudyConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open study config: " + path);
    StudyConfig cfg;
    cfg.sample_sizes.clear();
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        if (key == "mode")
            cfg.mode = val == "misspecification" ? Mode::misspecification : Mode::estimation;
        else if (key == "family") cfg.family_spec = val;
        else if (key == "beta") cfg.beta = std::stod(val);
        else if (key == "gamma") cfg.gamma = std::stod(val);
        else if (key == "theta") cfg.theta = std::stod(val);
        else if (key == "replicates") cfg.replicates = std::stoi(val);
        else if (key == "method") cfg.method = val == "direct" ? Method::direct : Method::em;
        else if (key == "censoring") cfg.censoring_fraction = std::stod(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "threads") cfg.threads = std::stoi(val);
        else if (key == "sizes" || key == "n") {
            std::stringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ',')) cfg.sample_sizes.push_back(std::stoi(tok));
        } else if (key == "competitors") {
            std::stringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ';')) {
                if (!tok.empty()) cfg.competitors.push_back(trim(tok));
            }
        } else {
            throw std::runtime_error("unknown study config key: " + key);
        }
    }
    if (cfg.sample_sizes.empty()) cfg.sample_sizes = {30, 50, 100, 200};
    cfg.validate();
    return cfg;
}

// ------------------------------------------------------------- censoring

double calibrate_censoring_rate(const GpsParams& params, double fraction) {
    if (!(fraction > 0.0) || !(fraction < 1.0))
        throw std::domain_error("calibrate_censoring_rate: fraction in (0,1)");
    const double hi_x = upper_support(params);
    auto censored_share = [&](double lambda) {
        // P(X > C) = int lambda e^{-lambda c} S_X(c) dc
        const double hi = std::min(hi_x, 45.0 / lambda);
        QuadratureOptions opts;
        opts.rel_tol = 1e-10;
        return integrate(
            [&](double c) { return lambda * std::exp(-lambda * c) * survival(params, c); },
            0.0, hi, opts);
    };
    double lo = 1.0 / hi_x, hi = lo;
    while (censored_share(lo) > fraction && lo > 1e-12) lo /= 4.0;
    while (censored_share(hi) < fraction && hi < 1e12) hi *= 4.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (censored_share(mid) - fraction < 0.0) lo = mid;
        else hi = mid;
    }
    return std::sqrt(lo * hi);
}

CensoredSample generate_censored_sample(const GpsParams& params, std::size_t n,
                                        double censoring_fraction, std::uint64_t seed) {
    const std::vector<double> xs = sample(params, n, seed);
    CensoredSample out;
    out.values.resize(n);
    out.indicators.assign(n, 1);
    if (censoring_fraction <= 0.0) {
        out.values = xs;
        return out;
    }
    const double lambda = calibrate_censoring_rate(params, censoring_fraction);
    Rng c_rng(derive_seed(seed, 0x9d2c5680ULL));
    for (std::size_t i = 0; i < n; ++i) {
        const double c = -std::log1p(-c_rng.uniform()) / lambda;
        if (c < xs[i]) {
            out.values[i] = c;
            out.indicators[i] = 0;
        } else {
            out.values[i] = xs[i];
        }
    }
    return out;
}

// ----------------------------------------------------------- study runs

namespace {

struct ReplicateFit {
    bool usable = false;
    Vec3 estimate{};
    Vec3 var_diag{};   // diagonal of I^{-1}
    Vec3 covered{};    // 95% CI contains truth (0/1 per parameter)
};

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    int hw = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    hw = std::max(1, std::min(hw, count));
    if (hw == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < hw; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

GpsParams truth_params(const StudyConfig& cfg, const ModelSpec& spec) {
    GpsParams p{cfg.beta, cfg.gamma, cfg.theta, spec.family, false};
    p.validate();
    return p;
}

}  // namespace

StudyReport run_estimation_study(const StudyConfig& cfg) {
    cfg.validate();
    const ModelSpec spec = ModelSpec::parse(cfg.family_spec);
    const GpsParams truth = truth_params(cfg, spec);
    const Vec3 truth_vec{cfg.beta, cfg.gamma, cfg.theta};
    StudyReport report;
    report.config = cfg;

    FitOptions fit_opts;
    fit_opts.classic_geometric = spec.classic_geometric ||
                                 spec.family.kind() == FamilyKind::geometric;

    for (std::size_t ci = 0; ci < cfg.sample_sizes.size(); ++ci) {
        const int n = cfg.sample_sizes[ci];
        std::vector<ReplicateFit> fits(cfg.replicates);
        double lambda = 0.0;
        if (cfg.censoring_fraction > 0.0)
            lambda = calibrate_censoring_rate(truth, cfg.censoring_fraction);

        parallel_for(cfg.replicates, cfg.threads, [&](int rep) {
            const std::uint64_t seed =
                derive_seed(cfg.seed, (static_cast<std::uint64_t>(ci) << 32) |
                                          static_cast<std::uint64_t>(rep));
            ReplicateFit& slot = fits[rep];
            try {
                FitResult fit;
                if (cfg.censoring_fraction > 0.0) {
                    const CensoredSample data =
                        generate_censored_sample(truth, n, cfg.censoring_fraction, seed);
                    fit = mle_direct(spec.family, data, std::nullopt, fit_opts);
                } else {
                    const ObservedSample data{sample(truth, n, seed)};
                    fit = cfg.method == StudyConfig::Method::em
                              ? em_fit(spec.family, data)
                              : mle_direct(spec.family, data, std::nullopt, fit_opts);
                }
                if (!fit.converged || !fit.se_available) return;
                const auto ci95 = confidence_intervals(fit, 0.95);
                slot.usable = true;
                slot.estimate = {fit.params.beta, fit.params.gamma, fit.params.theta};
                for (int j = 0; j < 3; ++j) {
                    slot.var_diag[j] = fit.std_errors[j] * fit.std_errors[j];
                    slot.covered[j] =
                        (ci95[j].lo <= truth_vec[j] && truth_vec[j] <= ci95[j].hi) ? 1.0 : 0.0;
                }
            } catch (const std::exception&) {
                slot.usable = false;
            }
        });

        CellReport cell;
        cell.n = n;
        cell.truth = truth_vec;
        cell.attempted = cfg.replicates;
        cell.censoring_lambda = lambda;
        int used = 0;
        for (const auto& f : fits) used += f.usable ? 1 : 0;
        cell.used = used;
        cell.convergence_rate = cfg.replicates > 0
                                    ? static_cast<double>(used) / cfg.replicates
                                    : 0.0;
        if (used > 0) {
            const double r = static_cast<double>(used);
            for (int j = 0; j < 3; ++j) {
                double sum = 0.0;
                for (const auto& f : fits)
                    if (f.usable) sum += f.estimate[j];
                cell.ae[j] = sum / r;
                double mse = 0.0, vs = 0.0, ef = 0.0, cp = 0.0;
                for (const auto& f : fits) {
                    if (!f.usable) continue;
                    const double e = f.estimate[j];
                    mse += (e - truth_vec[j]) * (e - truth_vec[j]);
                    vs += (e - cell.ae[j]) * (e - cell.ae[j]);
                    ef += f.var_diag[j];
                    cp += f.covered[j];
                }
                cell.mse[j] = mse / r;
                cell.vs[j] = vs / r;
                cell.ef[j] = ef / r;
                cell.cp[j] = cp / r;
            }
        }
        report.cells.push_back(cell);
    }
    return report;
}

StudyReport run_misspecification_study(const StudyConfig& cfg) {
    cfg.validate();
    const ModelSpec generator = ModelSpec::parse(cfg.family_spec);
    const GpsParams truth = truth_params(cfg, generator);
    std::vector<ModelSpec> rivals;
    for (const auto& c : cfg.competitors) rivals.push_back(ModelSpec::parse(c));

    StudyReport report;
    report.config = cfg;

    for (std::size_t ci = 0; ci < cfg.sample_sizes.size(); ++ci) {
        const int n = cfg.sample_sizes[ci];
        struct RepCounts {
            bool usable = false;
            std::vector<std::array<bool, 3>> preferred;
        };
        std::vector<RepCounts> reps(cfg.replicates);

        parallel_for(cfg.replicates, cfg.threads, [&](int rep) {
            const std::uint64_t seed =
                derive_seed(cfg.seed, (static_cast<std::uint64_t>(ci + 1000) << 32) |
                                          static_cast<std::uint64_t>(rep));
            RepCounts& slot = reps[rep];
            try {
                const ObservedSample data{sample(truth, n, seed)};
                FitOptions base_opts;
                base_opts.classic_geometric = generator.classic_geometric;
                const FitResult base = mle_direct(generator.family, data, std::nullopt, base_opts);
                if (!base.converged) return;
                const InformationCriteria base_ic =
                    information_criteria(base.loglik, generator.free_params(), n);
                slot.preferred.resize(rivals.size());
                for (std::size_t k = 0; k < rivals.size(); ++k) {
                    FitOptions opts;
                    opts.classic_geometric = rivals[k].classic_geometric;
                    const FitResult fit =
                        mle_direct(rivals[k].family, data, std::nullopt, opts);
                    if (!fit.converged) return;
                    const InformationCriteria ic =
                        information_criteria(fit.loglik, rivals[k].free_params(), n);
                    slot.preferred[k] = {ic.aic < base_ic.aic, ic.aicc < base_ic.aicc,
                                         ic.bic < base_ic.bic};
                }
                slot.usable = true;
            } catch (const std::exception&) {
                slot.usable = false;
            }
        });

        MisspecCell cell;
        cell.n = n;
        for (const auto& r : rivals) cell.competitors.push_back(r.label);
        cell.counts.assign(rivals.size(), {0, 0, 0});
        for (const auto& rep : reps) {
            if (!rep.usable) continue;
            ++cell.replicates_used;
            for (std::size_t k = 0; k < rivals.size(); ++k)
                for (int c = 0; c < 3; ++c) cell.counts[k][c] += rep.preferred[k][c] ? 1 : 0;
        }
        report.misspec.push_back(cell);
    }
    return report;
}

StudyReport run_study(const StudyConfig& cfg) {
    return cfg.mode == StudyConfig::Mode::misspecification
               ? run_misspecification_study(cfg)
               : run_estimation_study(cfg);
}

// ---------------------------------------------------------------- output

std::string StudyReport::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    static const char* param_names[3] = {"beta", "gamma", "theta"};
    if (!cells.empty()) {
        os << "n,parameter,truth,AE,MSE,VS,EF,CP,convergence_rate,used,attempted\n";
        for (const auto& c : cells)
            for (int j = 0; j < 3; ++j)
                os << c.n << ',' << param_names[j] << ',' << c.truth[j] << ',' << c.ae[j]
                   << ',' << c.mse[j] << ',' << c.vs[j] << ',' << c.ef[j] << ',' << c.cp[j]
                   << ',' << c.convergence_rate << ',' << c.used << ',' << c.attempted
                   << '\n';
    }
    if (!misspec.empty()) {
        os << "n,criterion,competitor,count,replicates\n";
        static const char* crit[3] = {"AIC", "AICC", "BIC"};
        for (const auto& m : misspec)
            for (int c = 0; c < 3; ++c)
                for (std::size_t k = 0; k < m.competitors.size(); ++k)
                    os << m.n << ',' << crit[c] << ',' << m.competitors[k] << ','
                       << m.counts[k][c] << ',' << m.replicates_used << '\n';
    }
    return os.str();
}

std::string StudyReport::to_text() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    static const char* param_names[3] = {"beta", "gamma", "theta"};
    if (!cells.empty()) {
        os << "estimation study: family=" << config.family_spec << " truth=(" << config.beta
           << ", " << config.gamma << ", " << config.theta << ")"
           << " replicates=" << config.replicates;
        if (config.censoring_fraction > 0.0)
            os << " censoring=" << config.censoring_fraction;
        os << "\n";
        os << std::setw(6) << "n" << std::setw(8) << "param" << std::setw(10) << "AE"
           << std::setw(10) << "MSE" << std::setw(10) << "VS" << std::setw(10) << "EF"
           << std::setw(8) << "CP" << std::setw(10) << "conv" << '\n';
        for (const auto& c : cells)
            for (int j = 0; j < 3; ++j)
                os << std::setw(6) << c.n << std::setw(8) << param_names[j] << std::setw(10)
                   << c.ae[j] << std::setw(10) << c.mse[j] << std::setw(10) << c.vs[j]
                   << std::setw(10) << c.ef[j] << std::setw(8) << c.cp[j] << std::setw(10)
                   << c.convergence_rate << '\n';
    }
    if (!misspec.empty()) {
        os << "misspecification study: generator=" << config.family_spec << " truth=("
           << config.beta << ", " << config.gamma << ", " << config.theta << ")\n";
        static const char* crit[3] = {"AIC", "AICC", "BIC"};
        os << std::setw(6) << "n";
        for (const auto& name : misspec.front().competitors)
            for (int c = 0; c < 3; ++c) os << std::setw(14) << (name + "/" + crit[c]);
        os << '\n';
        for (const auto& m : misspec) {
            os << std::setw(6) << m.n;
            for (std::size_t k = 0; k < m.competitors.size(); ++k)
                for (int c = 0; c < 3; ++c) os << std::setw(14) << m.counts[k][c];
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace gps
