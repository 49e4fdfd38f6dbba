#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

namespace situ {

struct ParamBlock {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// Named matrices packed into one flat vector. Parameters, gradients and
// optimizer moments share the layout, so each is a plain Eigen::VectorXd.
class ParamLayout {
 public:
  std::size_t add(std::string name, int rows, int cols);

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(std::size_t i) const { return blocks_.at(i); }
  std::size_t size() const { return size_; }

  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;

  // Column-major view of block `i` inside `flat`.
  MatMap view(Eigen::VectorXd& flat, std::size_t i) const;
  ConstMatMap view(const Eigen::VectorXd& flat, std::size_t i) const;

 private:
  std::vector<ParamBlock> blocks_;
  std::size_t size_ = 0;
};

}  // namespace situ
