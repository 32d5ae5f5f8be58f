#include "gps/record.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace gps {

namespace {

struct Entry {
    std::string key;
    nlohmann::json value;
};

std::vector<Entry> collect(const FitResult& fit, const GofReport* gof) {
    auto num = [](double v) {
        return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    };
    std::vector<Entry> e;
    e.push_back({"family", fit.params.family.name()});
    e.push_back({"extended_gg", fit.params.extended_gg});
    e.push_back({"method", fit.method});
    e.push_back({"beta", num(fit.params.beta)});
    e.push_back({"gamma", num(fit.params.gamma)});
    if (fit.n_free == 3) e.push_back({"theta", num(fit.params.theta)});
    if (fit.se_available) {
        e.push_back({"beta_se", num(fit.std_errors[0])});
        e.push_back({"gamma_se", num(fit.std_errors[1])});
        if (fit.n_free == 3) e.push_back({"theta_se", num(fit.std_errors[2])});
    }
    e.push_back({"loglik", num(fit.loglik)});
    e.push_back({"iterations", fit.iterations});
    e.push_back({"converged", fit.converged});
    e.push_back({"n_free_params", fit.n_free});
    e.push_back({"gamma_root_condition", fit.diagnostics.flags.gamma_root});
    e.push_back({"theta_root_condition", fit.diagnostics.flags.theta_root});
    if (fit.params.family.kind() == FamilyKind::binomial)
        e.push_back({"theta_root_condition_gb", fit.diagnostics.flags.theta_root_second});
    if (fit.diagnostics.boundary_gompertz)
        e.push_back({"boundary", "reduces to Gompertz"});
    if (fit.diagnostics.used_direct_search) e.push_back({"direct_search_fallback", true});
    if (gof) {
        e.push_back({"ks_stat", num(gof->ks_stat)});
        e.push_back({"ks_pvalue", num(gof->ks_pvalue)});
        e.push_back({"aic", num(gof->aic)});
        if (gof->aicc_available) e.push_back({"aicc", num(gof->aicc)});
        e.push_back({"bic", num(gof->bic)});
        e.push_back({"n", gof->n});
        e.push_back({"k", gof->k});
    }
    return e;
}

}  // namespace

std::string fit_record(const FitResult& fit, const GofReport* gof, RecordFormat format) {
    const auto entries = collect(fit, gof);
    if (format == RecordFormat::json) {
        nlohmann::ordered_json j;
        for (const auto& [key, value] : entries) j[key] = value;
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os.precision(10);
    for (const auto& [key, value] : entries) {
        os << key << ',';
        if (value.is_string()) os << value.get<std::string>();
        else os << value.dump();
        os << '\n';
    }
    return os.str();
}

}  // namespace gps
