#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace odectrl::math {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ParamBlock {
  Matrix value;
  Matrix grad;  // same shape as value, zeroed between optimizer steps
};

// Named parameter blocks with mirrored gradient accumulators. Iteration order
// is the lexicographic block-name order, which keeps optimizer sweeps and
// serialization deterministic.
class ParamStore {
 public:
  ParamBlock& add(const std::string& name, Matrix init) {
    if (blocks_.count(name)) throw invalid_argument("duplicate parameter block: " + name);
    ParamBlock block;
    block.grad = Matrix::Zero(init.rows(), init.cols());
    block.value = std::move(init);
    return blocks_.emplace(name, std::move(block)).first->second;
  }

  bool contains(const std::string& name) const { return blocks_.count(name) != 0; }

  ParamBlock& at(const std::string& name) {
    auto it = blocks_.find(name);
    if (it == blocks_.end()) throw invalid_argument("unknown parameter block: " + name);
    return it->second;
  }
  const ParamBlock& at(const std::string& name) const {
    auto it = blocks_.find(name);
    if (it == blocks_.end()) throw invalid_argument("unknown parameter block: " + name);
    return it->second;
  }

  void zero_grads() {
    for (auto& [name, block] : blocks_) block.grad.setZero();
  }

  double squared_norm() const {
    double out = 0.0;
    for (const auto& [name, block] : blocks_) out += block.value.squaredNorm();
    return out;
  }

  std::size_t size() const { return blocks_.size(); }

  auto begin() { return blocks_.begin(); }
  auto end() { return blocks_.end(); }
  auto begin() const { return blocks_.begin(); }
  auto end() const { return blocks_.end(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(blocks_.size());
    for (const auto& [name, block] : blocks_) out.push_back(name);
    return out;
  }

 private:
  std::map<std::string, ParamBlock> blocks_;
};

}  // namespace odectrl::math
