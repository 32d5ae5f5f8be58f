// Command-line front end: fit lifetime datasets, draw samples, emit curve
// tables, run Monte-Carlo studies, and report goodness-of-fit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gps/datasets.hpp"
#include "gps/distribution.hpp"
#include "gps/estimation.hpp"
#include "gps/gof.hpp"
#include "gps/moments.hpp"
#include "gps/record.hpp"
#include "gps/simlab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

struct Dataset {
    std::vector<double> values;
    std::vector<int> indicators;
    bool censored = false;
};

// One value per line, optional second column delta in {0,1}; an optional
// header line is skipped when the first field is not numeric.
Dataset load_dataset(const std::string& source) {
    Dataset ds;
    if (source == "builtin:glass-fibres") {
        ds.values = gps::glass_fibre_strengths();
        return ds;
    }
    std::ifstream in(source);
    if (!in) throw std::runtime_error("cannot open dataset: " + source);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        for (char& c : line)
            if (c == ',' || c == '\t' || c == ';') c = ' ';
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;
        double value;
        try {
            value = std::stod(tok);
        } catch (const std::exception&) {
            if (first) { first = false; continue; }  // header
            throw std::runtime_error("bad value '" + tok + "' in " + source);
        }
        first = false;
        ds.values.push_back(value);
        std::string second;
        if (ss >> second) {
            const int delta = std::stoi(second);
            ds.indicators.push_back(delta);
            ds.censored = true;
        } else {
            ds.indicators.push_back(1);
        }
    }
    if (ds.values.empty()) throw std::runtime_error("dataset is empty: " + source);
    return ds;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << content;
}

gps::GpsParams params_from_flags(const gps::ModelSpec& spec, double beta, double gamma,
                                 double theta) {
    gps::GpsParams p{beta, gamma, theta, spec.family, false};
    if (spec.family.kind() == gps::FamilyKind::geometric && !spec.classic_geometric &&
        !(theta > 0.0 && theta < 1.0))
        p.extended_gg = true;
    if (spec.free_params() == 2) p.theta = 1.0;
    p.validate();
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gompertz-power-series lifetime distributions: fitting, sampling, "
                 "curves, goodness-of-fit, and Monte-Carlo studies"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string format_name = "json-record";
    std::uint64_t seed = 20240915;
    app.add_option("--format", format_name, "Output format: json-record or csv")
        ->check(CLI::IsMember({"json-record", "csv"}));
    app.add_option("--seed", seed, "Seed for anything stochastic");

    // ---- fit
    auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood fit of a dataset");
    std::string fit_data, fit_family = "gg", fit_method = "direct", fit_out;
    int fit_m = 5;
    std::string fit_poly;
    double fit_level = 0.95;
    fit_cmd->add_option("--data", fit_data, "CSV path or builtin:glass-fibres")->required();
    fit_cmd->add_option("--family", fit_family,
                        "gompertz | gg | gg-classic | gp | gb | gl | poly");
    fit_cmd->add_option("--m", fit_m, "Binomial replica count (family gb)");
    fit_cmd->add_option("--poly", fit_poly, "Polynomial terms n1:a1,n2:a2,...");
    fit_cmd->add_option("--method", fit_method, "direct | em (complete data only)")
        ->check(CLI::IsMember({"direct", "em"}));
    fit_cmd->add_option("--level", fit_level, "Confidence level for intervals");
    fit_cmd->add_option("--out", fit_out, "Output path (default stdout)");

    // ---- sample
    auto* sample_cmd = app.add_subcommand("sample", "Inverse-transform random draws");
    std::string sample_family = "gg", sample_poly, sample_out;
    int sample_m = 5;
    double s_beta = 0.5, s_gamma = 2.0, s_theta = 0.9;
    std::size_t sample_n = 100;
    sample_cmd->add_option("--family", sample_family, "Model family");
    sample_cmd->add_option("--m", sample_m, "Binomial replica count");
    sample_cmd->add_option("--poly", sample_poly, "Polynomial terms");
    sample_cmd->add_option("--beta", s_beta)->required();
    sample_cmd->add_option("--gamma", s_gamma)->required();
    sample_cmd->add_option("--theta", s_theta);
    sample_cmd->add_option("--n", sample_n, "Number of draws");
    sample_cmd->add_option("--out", sample_out, "Output path (default stdout)");

    // ---- curve
    auto* curve_cmd = app.add_subcommand("curve", "Tab-separated x/pdf/cdf/survival/hazard");
    std::string curve_family = "gg", curve_poly, curve_out;
    int curve_m = 5;
    double c_beta = 0.5, c_gamma = 2.0, c_theta = 0.9;
    double c_xmin = 0.0, c_xmax = 3.0;
    std::size_t c_points = 200;
    curve_cmd->add_option("--family", curve_family, "Model family");
    curve_cmd->add_option("--m", curve_m, "Binomial replica count");
    curve_cmd->add_option("--poly", curve_poly, "Polynomial terms");
    curve_cmd->add_option("--beta", c_beta)->required();
    curve_cmd->add_option("--gamma", c_gamma)->required();
    curve_cmd->add_option("--theta", c_theta);
    curve_cmd->add_option("--xmin", c_xmin);
    curve_cmd->add_option("--xmax", c_xmax);
    curve_cmd->add_option("--points", c_points);
    curve_cmd->add_option("--out", curve_out, "Output path (default stdout)");

    // ---- study
    auto* study_cmd = app.add_subcommand("study", "Monte-Carlo estimation or "
                                                  "misspecification study");
    std::string study_config, study_dir = ".";
    study_cmd->add_option("--config", study_config, "key=value study config")->required();
    study_cmd->add_option("--out-dir", study_dir, "Directory for report files");

    // ---- gof
    auto* gof_cmd = app.add_subcommand("gof", "Goodness-of-fit at given parameters");
    std::string gof_data, gof_family = "gg", gof_poly, gof_out;
    int gof_m = 5;
    double g_beta = 0.5, g_gamma = 2.0, g_theta = 0.9, g_loglik = 0.0;
    bool g_have_loglik = false;
    gof_cmd->add_option("--data", gof_data, "CSV path or builtin:glass-fibres")->required();
    gof_cmd->add_option("--family", gof_family, "Model family");
    gof_cmd->add_option("--m", gof_m, "Binomial replica count");
    gof_cmd->add_option("--poly", gof_poly, "Polynomial terms");
    gof_cmd->add_option("--beta", g_beta)->required();
    gof_cmd->add_option("--gamma", g_gamma)->required();
    gof_cmd->add_option("--theta", g_theta);
    gof_cmd->add_option("--loglik", g_loglik, "Skip recomputing the log-likelihood")
        ->each([&](const std::string&) { g_have_loglik = true; });
    gof_cmd->add_option("--out", gof_out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    const gps::RecordFormat format =
        format_name == "csv" ? gps::RecordFormat::csv : gps::RecordFormat::json;

    try {
        if (*fit_cmd) {
            auto spec_text = fit_family == "gb" ? "gb(" + std::to_string(fit_m) + ")"
                           : fit_family == "poly" ? "poly(" + fit_poly + ")"
                                                  : fit_family;
            const gps::ModelSpec spec = gps::ModelSpec::parse(spec_text);
            const Dataset ds = load_dataset(fit_data);
            gps::FitOptions opts;
            opts.classic_geometric = spec.classic_geometric;
            gps::FitResult fit;
            gps::GofReport gof;
            bool have_gof = false;
            if (ds.censored) {
                if (fit_method == "em")
                    throw std::runtime_error("EM supports complete data only");
                gps::CensoredSample data{ds.values, ds.indicators};
                fit = mle_direct(spec.family, data, std::nullopt, opts);
            } else {
                gps::ObservedSample data{ds.values};
                fit = fit_method == "em" ? em_fit(spec.family, data)
                                         : mle_direct(spec.family, data, std::nullopt, opts);
                gof = gps::evaluate_gof(fit.params, data, fit.n_free, fit.loglik);
                have_gof = true;
            }
            write_output(fit_out, gps::fit_record(fit, have_gof ? &gof : nullptr, format));
            return fit.converged ? kExitOk : kExitNotConverged;
        }

        if (*sample_cmd) {
            auto spec_text = sample_family == "gb" ? "gb(" + std::to_string(sample_m) + ")"
                           : sample_family == "poly" ? "poly(" + sample_poly + ")"
                                                     : sample_family;
            const gps::ModelSpec spec = gps::ModelSpec::parse(spec_text);
            const gps::GpsParams p = params_from_flags(spec, s_beta, s_gamma, s_theta);
            std::ostringstream os;
            os.precision(12);
            for (const double x : gps::sample(p, sample_n, seed)) os << x << '\n';
            write_output(sample_out, os.str());
            return kExitOk;
        }

        if (*curve_cmd) {
            auto spec_text = curve_family == "gb" ? "gb(" + std::to_string(curve_m) + ")"
                           : curve_family == "poly" ? "poly(" + curve_poly + ")"
                                                    : curve_family;
            const gps::ModelSpec spec = gps::ModelSpec::parse(spec_text);
            const gps::GpsParams p = params_from_flags(spec, c_beta, c_gamma, c_theta);
            std::ostringstream os;
            os.precision(12);
            gps::emit_curve(p, gps::linear_grid(c_xmin, c_xmax, c_points), os);
            write_output(curve_out, os.str());
            return kExitOk;
        }

        if (*study_cmd) {
            gps::StudyConfig cfg = gps::StudyConfig::from_file(study_config);
            const gps::StudyReport report = gps::run_study(cfg);
            namespace fs = std::filesystem;
            fs::create_directories(study_dir);
            const std::string stem =
                (fs::path(study_config).stem().string().empty()
                     ? std::string("study")
                     : fs::path(study_config).stem().string());
            std::ofstream csv(fs::path(study_dir) / (stem + "_report.csv"));
            csv << report.to_csv();
            std::ofstream txt(fs::path(study_dir) / (stem + "_report.txt"));
            txt << report.to_text();
            std::cout << report.to_text();
            return kExitOk;
        }

        if (*gof_cmd) {
            auto spec_text = gof_family == "gb" ? "gb(" + std::to_string(gof_m) + ")"
                           : gof_family == "poly" ? "poly(" + gof_poly + ")"
                                                  : gof_family;
            const gps::ModelSpec spec = gps::ModelSpec::parse(spec_text);
            const Dataset ds = load_dataset(gof_data);
            if (ds.censored) throw std::runtime_error("gof expects complete data");
            const gps::GpsParams p = params_from_flags(spec, g_beta, g_gamma, g_theta);
            gps::ObservedSample data{ds.values};
            const double ll = g_have_loglik ? g_loglik : log_likelihood(p, data);
            const gps::GofReport gof = gps::evaluate_gof(p, data, spec.free_params(), ll);
            std::ostringstream os;
            os.precision(10);
            if (format == gps::RecordFormat::csv) {
                os << "ks_stat," << gof.ks_stat << "\nks_pvalue," << gof.ks_pvalue
                   << "\nloglik," << gof.loglik << "\naic," << gof.aic;
                if (gof.aicc_available) os << "\naicc," << gof.aicc;
                os << "\nbic," << gof.bic << "\nn," << gof.n << "\nk," << gof.k << '\n';
            } else {
                os << "{\n  \"ks_stat\": " << gof.ks_stat
                   << ",\n  \"ks_pvalue\": " << gof.ks_pvalue
                   << ",\n  \"loglik\": " << gof.loglik << ",\n  \"aic\": " << gof.aic;
                if (gof.aicc_available) os << ",\n  \"aicc\": " << gof.aicc;
                os << ",\n  \"bic\": " << gof.bic << ",\n  \"n\": " << gof.n
                   << ",\n  \"k\": " << gof.k << "\n}\n";
            }
            write_output(gof_out, os.str());
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
