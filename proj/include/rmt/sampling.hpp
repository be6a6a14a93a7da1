#pragma once

#include <cstddef>
#include <vector>

#include "rmt/dataset.hpp"
#include "rmt/rng.hpp"

namespace rmt {

// n x d row-major matrix of i.i.d. N(0,1). Consumes exactly 2*n*d counter positions;
// entries live at fixed absolute positions, so the parallel fill is bit-identical to
// the serial one at any thread count.
std::vector<double> sample_gaussian_matrix(std::size_t n, std::size_t d, RngStream& rng);

// |S ∩ T| for independent uniformly random subsets S, T of [n] with |S| = k1, |T| = k2.
// Exact sequential-conditional sampler, O(min(k1, k2)) per draw.
std::size_t sample_hypergeometric(std::size_t n, std::size_t k1, std::size_t k2,
                                  RngStream& rng);

// Exact Binomial(n, p) sampler: inverse transform walked outward from the mode.
std::size_t sample_binomial(std::size_t n, double p, RngStream& rng);

// Uniformly random size-k subset of [n], ascending order.
std::vector<std::size_t> sample_subset(std::size_t n, std::size_t k, RngStream& rng);

namespace serial {
std::vector<double> sample_gaussian_matrix(std::size_t n, std::size_t d, RngStream& rng);
}

}  // namespace rmt
