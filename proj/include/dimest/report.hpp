#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dimest {

// Cross-cutting result of any estimator run. `estimate` is NaN only when the
// run threw; per-point trouble surfaces as flags plus diagnostics, never as a
// silent change of value.
struct EstimateReport {
    double estimate = std::numeric_limits<double>::quiet_NaN();
    std::optional<std::vector<double>> locals;
    std::vector<std::string> flags;                 // sorted, unique
    std::map<std::string, double> diagnostics;

    void flag(const std::string& f);
    bool has_flag(const std::string& f) const;
};

// flag vocabulary shared across estimators
inline constexpr const char* FLAG_THROTTLED = "throttled";
inline constexpr const char* FLAG_DEGENERATE = "degenerate";
inline constexpr const char* FLAG_SLOPE_HAZARD = "slope_hazard";
inline constexpr const char* FLAG_NONCONVERGENT = "nonconvergent";
inline constexpr const char* FLAG_APPROXIMATE = "approximate";

nlohmann::json report_to_json(const EstimateReport& r);
EstimateReport report_from_json(const nlohmann::json& j);

} // namespace dimest
