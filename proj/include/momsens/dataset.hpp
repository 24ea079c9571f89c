#pragma once

#include <string>
#include <utility>
#include <vector>

#include "momsens/linalg.hpp"

namespace momsens {

// Columnar numeric table with named columns of equal length.
class Dataset {
 public:
  Dataset() = default;

  void add_column(std::string name, Vector values) {
    if (!cols_.empty() && values.size() != cols_.front().size()) {
      throw IoError("Dataset: column '" + name + "' has mismatched length");
    }
    names_.push_back(std::move(name));
    cols_.push_back(std::move(values));
  }

  bool has(const std::string& name) const {
    for (const auto& n : names_)
      if (n == name) return true;
    return false;
  }

  const Vector& col(const std::string& name) const {
    for (size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return cols_[i];
    throw IoError("Dataset: unknown column '" + name + "'");
  }

  Eigen::Index rows() const { return cols_.empty() ? 0 : cols_.front().size(); }
  Eigen::Index columns() const { return static_cast<Eigen::Index>(cols_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const Vector& col_at(size_t i) const { return cols_[i]; }

 private:
  std::vector<std::string> names_;
  std::vector<Vector> cols_;
};

}  // namespace momsens
