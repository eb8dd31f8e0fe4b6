#pragma once

#include <cstdint>

#include "vclab/cloud.hpp"

// Empirical Wasserstein distances between equal-size uniform clouds: the
// optimal plan is an assignment, solved exactly by shortest augmenting paths.

namespace vclab {

enum class GroundNorm { euclidean, l1 };

// W_p between the empirical measures of a and b (same size and dimension);
// exact solver, capped at 4096 points
double w_exact(const PointCloud& a, const PointCloud& b, int order,
               GroundNorm norm);

// permutation enumeration oracle, capped at 8 points
double w_bruteforce(const PointCloud& a, const PointCloud& b, int order,
                    GroundNorm norm);

struct SubsampleEstimate {
  double estimate;
  double std_error;
  int n_sub;
  int reps;
};

// mean +- SE of w_exact over `reps` independent subsample pairs of size n_sub
SubsampleEstimate w_subsampled(const PointCloud& a, const PointCloud& b,
                               int order, GroundNorm norm, int n_sub, int reps,
                               uint64_t seed);

}  // namespace vclab
