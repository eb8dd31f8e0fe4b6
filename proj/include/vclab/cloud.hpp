#pragma once

#include <Eigen/Core>
#include <vector>

#include "vclab/model.hpp"

namespace vclab {

// one point per row; neuron clouds are n x 2 with columns (v, g)
using PointCloud = Eigen::MatrixXd;

struct CloudTrajectory {
  std::vector<double> times;
  std::vector<PointCloud> clouds;
};

struct MetricSeries {
  std::vector<double> times;
  std::vector<double> values;
};

inline PointCloud cloud_from_states(const std::vector<State>& states) {
  PointCloud c(static_cast<Eigen::Index>(states.size()), 2);
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    c(i, 0) = states[static_cast<size_t>(i)].v;
    c(i, 1) = states[static_cast<size_t>(i)].g;
  }
  return c;
}

}  // namespace vclab
