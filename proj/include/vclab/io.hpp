#pragma once

#include <string>

#include "vclab/cloud.hpp"
#include "vclab/integrator.hpp"

// CSV formats, all with headers and full double round-trip precision:
//   trajectory          t,v,g
//   pair trajectory     t,v,g,v_prime,g_prime
//   metric series       t,value
//   point cloud         v,g
//   network trajectory  t,v_1..v_N,g_1..g_N

namespace vclab {

struct PairState;            // coupling.hpp
struct PairTrajectory;       // coupling.hpp
struct NetworkTrajectory;    // network.hpp

void write_trajectory_csv(const std::string& path, const Trajectory& tr);
void write_metric_series_csv(const std::string& path, const MetricSeries& s);
void write_cloud_csv(const std::string& path, const PointCloud& c);
PointCloud read_cloud_csv(const std::string& path);
void write_pair_trajectory_csv(const std::string& path,
                               const PairTrajectory& tr);
void write_network_trajectory_csv(const std::string& path,
                                  const NetworkTrajectory& tr);

}  // namespace vclab
