#include "situ/params.hpp"

#include <stdexcept>

namespace situ {

std::size_t ParamLayout::add(std::string name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("parameter block '" + name + "' has an empty shape");
  }
  blocks_.push_back({std::move(name), rows, cols, size_});
  size_ += blocks_.back().size();
  return blocks_.size() - 1;
}

ParamLayout::MatMap ParamLayout::view(Eigen::VectorXd& flat, std::size_t i) const {
  const auto& b = blocks_.at(i);
  return MatMap(flat.data() + b.offset, b.rows, b.cols);
}

ParamLayout::ConstMatMap ParamLayout::view(const Eigen::VectorXd& flat, std::size_t i) const {
  const auto& b = blocks_.at(i);
  return ConstMatMap(flat.data() + b.offset, b.rows, b.cols);
}

}  // namespace situ
