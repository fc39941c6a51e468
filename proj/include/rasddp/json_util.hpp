#pragma once

#include <vector>

#include "json.hpp"

namespace rasddp {

// Infinite values travel as the strings "inf" / "-inf".
nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const std::vector<double>& v);
std::vector<double> vector_from_json(const nlohmann::json& j);

}  // namespace rasddp
