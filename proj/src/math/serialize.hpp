#pragma once

#include <json.hpp>

#include "math/param_store.hpp"

namespace odectrl::math {

// Self-describing snapshot: {name: {"shape": [rows, cols], "data": [...]}}
// with data flattened row-major. nlohmann prints doubles at max_digits10, so
// the round-trip is bit-exact.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const ParamStore& params);
ParamStore params_from_json(const nlohmann::json& j);

}  // namespace odectrl::math
