#include "math/serialize.hpp"

namespace odectrl::math {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["shape"] = {m.rows(), m.cols()};
  std::vector<double> data;
  data.reserve(std::size_t(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = std::move(data);
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto shape = j.at("shape");
  const Eigen::Index rows = shape.at(0).get<Eigen::Index>();
  const Eigen::Index cols = shape.at(1).get<Eigen::Index>();
  const auto& data = j.at("data");
  if (Eigen::Index(data.size()) != rows * cols)
    throw invalid_argument("matrix_from_json: data length does not match shape");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data.at(k++).get<double>();
  return m;
}

nlohmann::json params_to_json(const ParamStore& params) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, block] : params) j[name] = matrix_to_json(block.value);
  return j;
}

ParamStore params_from_json(const nlohmann::json& j) {
  ParamStore params;
  for (auto it = j.begin(); it != j.end(); ++it) params.add(it.key(), matrix_from_json(it.value()));
  return params;
}

}  // namespace odectrl::math
