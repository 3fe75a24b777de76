#include "dimest/report.hpp"

#include <algorithm>
#include <cmath>

namespace dimest {

void EstimateReport::flag(const std::string& f) {
    auto it = std::lower_bound(flags.begin(), flags.end(), f);
    if (it == flags.end() || *it != f) flags.insert(it, f);
}

bool EstimateReport::has_flag(const std::string& f) const {
    return std::binary_search(flags.begin(), flags.end(), f);
}

nlohmann::json report_to_json(const EstimateReport& r) {
    nlohmann::json j;
    if (std::isnan(r.estimate))
        j["estimate"] = nullptr;
    else
        j["estimate"] = r.estimate;
    j["flags"] = r.flags;
    j["diagnostics"] = r.diagnostics;
    if (r.locals) j["locals"] = *r.locals;
    return j;
}

EstimateReport report_from_json(const nlohmann::json& j) {
    EstimateReport r;
    if (j.contains("estimate") && !j["estimate"].is_null()) r.estimate = j["estimate"].get<double>();
    if (j.contains("flags")) r.flags = j["flags"].get<std::vector<std::string>>();
    if (j.contains("diagnostics"))
        r.diagnostics = j["diagnostics"].get<std::map<std::string, double>>();
    if (j.contains("locals")) r.locals = j["locals"].get<std::vector<double>>();
    return r;
}

} // namespace dimest
