#pragma once

#include <Eigen/Core>

namespace omtree {

/// Dense channels x rows x cols tensor, channel-major then row-major.
struct Tensor3 {
  int channels = 0, rows = 0, cols = 0;
  Eigen::VectorXd data;

  Tensor3() = default;
  Tensor3(int c, int r, int w) : channels(c), rows(r), cols(w), data(Eigen::VectorXd::Zero(c * r * w)) {}

  double& at(int c, int i, int j) { return data[(c * rows + i) * cols + j]; }
  double at(int c, int i, int j) const { return data[(c * rows + i) * cols + j]; }
  int size() const { return channels * rows * cols; }

  bool operator==(const Tensor3& o) const {
    return channels == o.channels && rows == o.rows && cols == o.cols && data == o.data;
  }
};

}  // namespace omtree
