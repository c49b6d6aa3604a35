#pragma once

#include <cstdint>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace isodiff {

// Uniform points on the unit 2-sphere (normalized Gaussians), excluding a
// polar cap of angular radius 0.15 rad around the north pole (0,0,1) so the
// stereographic chart is well-posed on every sample.
std::vector<Tensor> gen_s2_dataset(std::uint64_t seed, int count);

constexpr double kS2PolarCap = 0.15;

enum class Toy2dKind { two_gaussians, ring, two_moons_embedded };

struct Toy2dSpec {
  Toy2dKind kind = Toy2dKind::two_gaussians;
  std::size_t ambient_n = 64;
  double noise_scale = 0.01;
  int count = 2048;
  std::uint64_t seed = 1;
};

// Seeded random orthonormal 2 -> n embedding (n x 2, orthonormal columns).
Tensor embedding_matrix(std::uint64_t seed, std::size_t n);

// Intrinsic 2-d structure embedded into R^n plus isotropic noise, then
// standardized to zero mean and unit variance per coordinate.
std::vector<Tensor> gen_toy2d_dataset(const Toy2dSpec& spec);

}  // namespace isodiff
