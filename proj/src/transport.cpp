#include "vclab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "vclab/rng.hpp"
#include "vclab/util.hpp"

namespace vclab {

namespace {

double ground_cost(const PointCloud& a, const PointCloud& b, Eigen::Index i,
                   Eigen::Index j, int order, GroundNorm norm) {
  double d = 0;
  if (norm == GroundNorm::euclidean) {
    d = (a.row(i) - b.row(j)).norm();
  } else {
    d = (a.row(i) - b.row(j)).cwiseAbs().sum();
  }
  return order == 1 ? d : d * d;
}

void check_pair(const PointCloud& a, const PointCloud& b, int order) {
  if (a.rows() == 0 || b.rows() == 0)
    throw std::invalid_argument("transport: clouds must be nonempty");
  if (a.rows() != b.rows())
    throw std::invalid_argument("transport: clouds must have equal sizes");
  if (a.cols() != b.cols())
    throw std::invalid_argument("transport: clouds must share a dimension");
  if (order != 1 && order != 2)
    throw std::invalid_argument("transport: order must be 1 or 2");
}

// compensated accumulator: degenerate instances admit several optimal
// assignments whose exact totals coincide, so the summed value must not
// depend on which one a solver returns or in which order it adds terms
struct NeumaierSum {
  double hi = 0, lo = 0;
  void add(double x) {
    const double s = hi + x;
    lo += std::abs(hi) >= std::abs(x) ? (hi - s) + x : (x - s) + hi;
    hi = s;
  }
  double value() const { return hi + lo; }
};

double assignment_total(const PointCloud& a, const PointCloud& b,
                        const std::vector<int>& match, int order,
                        GroundNorm norm) {
  NeumaierSum total;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    total.add(ground_cost(a, b, i, match[static_cast<size_t>(i)], order, norm));
  return total.value();
}

double assignment_value(const PointCloud& a, const PointCloud& b,
                        const std::vector<int>& match, int order,
                        GroundNorm norm) {
  const double mean =
      assignment_total(a, b, match, order, norm) / static_cast<double>(a.rows());
  return order == 1 ? mean : std::sqrt(mean);
}

// shortest-augmenting-path assignment with potentials, O(n^3)
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) match[static_cast<size_t>(p[j] - 1)] = j - 1;
  return match;
}

}  // namespace

double w_exact(const PointCloud& a, const PointCloud& b, int order,
               GroundNorm norm) {
  check_pair(a, b, order);
  const Eigen::Index n = a.rows();
  if (n > 4096)
    throw std::invalid_argument("w_exact supports at most 4096 points");
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cost(i, j) = ground_cost(a, b, i, j, order, norm);
  const auto match = solve_assignment(cost);
  return assignment_value(a, b, match, order, norm);
}

double w_bruteforce(const PointCloud& a, const PointCloud& b, int order,
                    GroundNorm norm) {
  check_pair(a, b, order);
  const int n = static_cast<int>(a.rows());
  if (n > 8)
    throw std::invalid_argument("w_bruteforce supports at most 8 points");
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_perm = perm;
  do {
    const double total = assignment_total(a, b, perm, order, norm);
    if (total < best) {
      best = total;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return assignment_value(a, b, best_perm, order, norm);
}

SubsampleEstimate w_subsampled(const PointCloud& a, const PointCloud& b,
                               int order, GroundNorm norm, int n_sub, int reps,
                               uint64_t seed) {
  check_pair(a, b, order);
  if (n_sub < 1 || n_sub > a.rows())
    throw std::invalid_argument("n_sub must lie in [1, cloud size]");
  if (n_sub > 4096)
    throw std::invalid_argument("n_sub is capped at 4096 (exact solver)");
  if (reps < 1) throw std::invalid_argument("reps must be positive");

  std::vector<double> vals(static_cast<size_t>(reps), 0.0);
  parallel_for(reps, [&](int64_t lo, int64_t hi) {
    for (int64_t r = lo; r < hi; ++r) {
      // partial Fisher-Yates per cloud, counters keyed by rep and side
      auto subsample = [&](const PointCloud& c, uint32_t side) {
        const int n = static_cast<int>(c.rows());
        std::vector<int> idx(static_cast<size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < n_sub; ++i) {
          const auto bits = rng::bits64(seed, static_cast<uint32_t>(r),
                                        static_cast<uint64_t>(i), side);
          const int j = i + static_cast<int>(bits % static_cast<uint64_t>(n - i));
          std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
        }
        PointCloud out(n_sub, c.cols());
        for (int i = 0; i < n_sub; ++i)
          out.row(i) = c.row(idx[static_cast<size_t>(i)]);
        return out;
      };
      vals[static_cast<size_t>(r)] =
          w_exact(subsample(a, 0), subsample(b, 1), order, norm);
    }
  });
  double mean = 0;
  for (double v : vals) mean += v;
  mean /= reps;
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean);
  SubsampleEstimate out{};
  out.estimate = mean;
  out.std_error = reps > 1 ? std::sqrt(var / (reps - 1) / reps) : 0.0;
  out.n_sub = n_sub;
  out.reps = reps;
  return out;
}

}  // namespace vclab
