#pragma once

#include "dimest/report.hpp"
#include "dimest/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace dimest {

struct ParamSpec {
    std::string name;
    enum class Kind { Number, Integer, Flag, Choice } kind;
    nlohmann::json def;
    std::vector<std::string> choices; // Choice only
    std::string help;
};

struct EstimatorInfo {
    std::string id;
    std::string family;   // tangential | parametric | graph
    std::string summary;
    std::vector<ParamSpec> params;
};

const std::vector<EstimatorInfo>& list_estimators();
const EstimatorInfo& estimator_info(const std::string& id);

// Validate `params` against the schema (unknown keys and malformed values
// throw std::invalid_argument naming the key) and run the estimator. `seed`
// feeds the randomized internals (subsampling, greedy restarts, pair
// sampling); estimators without randomness ignore it.
EstimateReport run_estimator(const std::string& id, const PointCloud& cloud,
                             const nlohmann::json& params, std::uint64_t seed = 0);

// schema-checked defaulting: params with defaults applied
nlohmann::json resolve_params(const std::string& id, const nlohmann::json& params);

} // namespace dimest
