#pragma once

#include <vector>

#include <json.hpp>

#include "bergman/mesh.hpp"

namespace bergman {

/// {"depth": J, "mesh": "dyadic"|"overlay", "alpha_list": [...], "values": [...]}.
/// Complex values are written as [re, im] pairs.
nlohmann::json to_json(const RealFunction& f, const std::vector<double>& alpha_list = {});
nlohmann::json to_json(const ComplexFunction& f, const std::vector<double>& alpha_list = {});

RealFunction real_function_from_json(const nlohmann::json& j);
ComplexFunction complex_function_from_json(const nlohmann::json& j);

}  // namespace bergman
