#include "math/adam.hpp"

#include <cmath>

#include "math/serialize.hpp"

namespace odectrl::math {

void Adam::step(ParamStore& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  for (auto& [name, block] : params) {
    auto it = moments_.find(name);
    if (it == moments_.end()) {
      it = moments_
               .emplace(name, std::make_pair(Matrix::Zero(block.value.rows(), block.value.cols()),
                                             Matrix::Zero(block.value.rows(), block.value.cols())))
               .first;
    }
    Matrix& m = it->second.first;
    Matrix& v = it->second.second;
    const Matrix& g = block.grad;
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      const double mhat = m.data()[k] / bc1;
      const double vhat = v.data()[k] / bc2;
      block.value.data()[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    block.grad.setZero();
  }
}

nlohmann::json Adam::to_json() const {
  nlohmann::json j;
  j["lr"] = cfg_.lr;
  j["beta1"] = cfg_.beta1;
  j["beta2"] = cfg_.beta2;
  j["eps"] = cfg_.eps;
  j["step"] = t_;
  nlohmann::json m = nlohmann::json::object(), v = nlohmann::json::object();
  for (const auto& [name, mv] : moments_) {
    m[name] = matrix_to_json(mv.first);
    v[name] = matrix_to_json(mv.second);
  }
  j["m"] = std::move(m);
  j["v"] = std::move(v);
  return j;
}

Adam Adam::from_json(const nlohmann::json& j) {
  AdamConfig cfg;
  cfg.lr = j.at("lr").get<double>();
  cfg.beta1 = j.at("beta1").get<double>();
  cfg.beta2 = j.at("beta2").get<double>();
  cfg.eps = j.at("eps").get<double>();
  Adam adam(cfg);
  adam.t_ = j.at("step").get<std::int64_t>();
  const auto& m = j.at("m");
  const auto& v = j.at("v");
  for (auto it = m.begin(); it != m.end(); ++it)
    adam.moments_[it.key()] = {matrix_from_json(it.value()), matrix_from_json(v.at(it.key()))};
  return adam;
}

}  // namespace odectrl::math
