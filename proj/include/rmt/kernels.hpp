#pragma once

#include <cstddef>
#include <vector>

#include "rmt/dataset.hpp"

namespace rmt {

// Dense numeric kernels. The default entry points are OpenMP-parallel over output
// entries with serial inner accumulation, so results are bit-identical to the
// rmt::serial twins at any thread count. The serial twins stay as the reference
// implementations for tests and for the kernel benchmark.

double dot(const double* a, const double* b, std::size_t d);
double norm2(const double* a, std::size_t d);  // squared Euclidean norm
double norm(const double* a, std::size_t d);

// Sum of the rows indexed by idx (duplicates allowed, order irrelevant).
std::vector<double> sum_subset(const Dataset& data, const std::vector<std::size_t>& idx);

// Sum_i sqrt(w_i) X_i.
std::vector<double> weighted_sum(const Dataset& data, const Weights& w);

// Gram(w)_{ij} = sqrt(w_i w_j) <X_i, X_j>, dense symmetric n x n, row-major.
std::vector<double> gram(const Dataset& data, const Weights& w);

// M(w) = Sum_i w_i X_i X_i^T, dense symmetric d x d, row-major.
std::vector<double> second_moment(const Dataset& data, const Weights& w);

// y = A x for dense symmetric k x k A.
std::vector<double> symv(const std::vector<double>& A, std::size_t k,
                         const std::vector<double>& x);

double frobenius_norm(const std::vector<double>& A);

namespace serial {
std::vector<double> weighted_sum(const Dataset& data, const Weights& w);
std::vector<double> gram(const Dataset& data, const Weights& w);
std::vector<double> second_moment(const Dataset& data, const Weights& w);
std::vector<double> symv(const std::vector<double>& A, std::size_t k,
                         const std::vector<double>& x);
}  // namespace serial

}  // namespace rmt
