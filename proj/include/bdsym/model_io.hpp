#pragma once

#include <string>

#include "bdsym/rates.hpp"
#include "bdsym/twod.hpp"

namespace bdsym {

/// JSON document {family, N?, window?, preset, params, lambda[], mu[], alpha[]}.
std::string model_to_json(const RateModel& model);
RateModel model_from_json(const std::string& text);
RateModel load_model(const std::string& path);
void save_model(const RateModel& model, const std::string& path);

/// JSON record {xi, branch, pi} for an ultimate line-crossing probability.
std::string crossing_to_json(const CrossingResult& result);

}  // namespace bdsym
