#ifndef PGA_SBM_HPP
#define PGA_SBM_HPP

#include <array>
#include <cstdint>

#include "pga/graph.hpp"

namespace pga {

/// Planted-partition graph with class-centroid features. Node i belongs to
/// block i / block_size. The centroid of class c is `centroid_scale` on the
/// c-th contiguous block of feature dimensions and zero elsewhere; every
/// feature gets isotropic Gaussian noise of stddev `feat_noise`.
struct SbmOptions {
  int blocks = 3;
  int block_size = 100;
  double p_in = 0.08;
  double p_out = 0.005;
  int feat_dim = 12;
  double feat_noise = 0.5;
  double centroid_scale = 0.16;
  std::array<double, 3> split_fractions{0.1, 0.1, 0.8};  // train, val, test
  std::uint64_t seed = 7;

  void validate() const;
};

GraphBundle generate_sbm(const SbmOptions& opts);

}  // namespace pga

#endif  // PGA_SBM_HPP
