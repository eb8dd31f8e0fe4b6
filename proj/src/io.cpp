#include "vclab/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "vclab/coupling.hpp"
#include "vclab/network.hpp"

namespace vclab {

namespace {

struct File {
  FILE* f;
  explicit File(const std::string& path) : f(std::fopen(path.c_str(), "w")) {
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  }
  ~File() {
    if (f) std::fclose(f);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;
};

// shortest decimal that round-trips the double
void put(FILE* f, double x) { std::fprintf(f, "%.17g", x); }

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  File out(path);
  std::fputs("t,v,g\n", out.f);
  for (size_t i = 0; i < tr.times.size(); ++i) {
    put(out.f, tr.times[i]);
    std::fputc(',', out.f);
    put(out.f, tr.states[i].v);
    std::fputc(',', out.f);
    put(out.f, tr.states[i].g);
    std::fputc('\n', out.f);
  }
}

void write_metric_series_csv(const std::string& path, const MetricSeries& s) {
  File out(path);
  std::fputs("t,value\n", out.f);
  for (size_t i = 0; i < s.times.size(); ++i) {
    put(out.f, s.times[i]);
    std::fputc(',', out.f);
    put(out.f, s.values[i]);
    std::fputc('\n', out.f);
  }
}

void write_cloud_csv(const std::string& path, const PointCloud& c) {
  if (c.cols() != 2)
    throw std::invalid_argument("cloud CSV stores (v, g) columns");
  File out(path);
  std::fputs("v,g\n", out.f);
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    put(out.f, c(i, 0));
    std::fputc(',', out.f);
    put(out.f, c(i, 1));
    std::fputc('\n', out.f);
  }
}

PointCloud read_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || (line != "v,g" && line != "v,g\r"))
    throw std::runtime_error(path + ": expected header 'v,g'");
  std::vector<double> vs, gs;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double v, g;
    char comma;
    if (!(ss >> v >> comma >> g) || comma != ',')
      throw std::runtime_error(path + ": malformed row at line " +
                               std::to_string(lineno));
    vs.push_back(v);
    gs.push_back(g);
  }
  PointCloud c(static_cast<Eigen::Index>(vs.size()), 2);
  for (size_t i = 0; i < vs.size(); ++i) {
    c(static_cast<Eigen::Index>(i), 0) = vs[i];
    c(static_cast<Eigen::Index>(i), 1) = gs[i];
  }
  return c;
}

void write_pair_trajectory_csv(const std::string& path,
                               const PairTrajectory& tr) {
  File out(path);
  std::fputs("t,v,g,v_prime,g_prime\n", out.f);
  for (size_t i = 0; i < tr.times.size(); ++i) {
    const auto& s = tr.states[i];
    put(out.f, tr.times[i]);
    std::fputc(',', out.f);
    put(out.f, s.z.v);
    std::fputc(',', out.f);
    put(out.f, s.z.g);
    std::fputc(',', out.f);
    put(out.f, s.zp.v);
    std::fputc(',', out.f);
    put(out.f, s.zp.g);
    std::fputc('\n', out.f);
  }
}

void write_network_trajectory_csv(const std::string& path,
                                  const NetworkTrajectory& tr) {
  File out(path);
  const Eigen::Index n = tr.states.empty() ? 0 : tr.states.front().v.size();
  std::fputs("t", out.f);
  for (Eigen::Index i = 1; i <= n; ++i)
    std::fprintf(out.f, ",v_%" PRIdPTR, static_cast<intptr_t>(i));
  for (Eigen::Index i = 1; i <= n; ++i)
    std::fprintf(out.f, ",g_%" PRIdPTR, static_cast<intptr_t>(i));
  std::fputc('\n', out.f);
  for (size_t k = 0; k < tr.times.size(); ++k) {
    put(out.f, tr.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::fputc(',', out.f);
      put(out.f, tr.states[k].v[i]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      std::fputc(',', out.f);
      put(out.f, tr.states[k].g[i]);
    }
    std::fputc('\n', out.f);
  }
}

}  // namespace vclab
