#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "rmt/common.hpp"

namespace rmt {

// Immutable row-major sample matrix: n points in R^d. Every entry finite.
class Dataset {
public:
  Dataset(std::size_t n, std::size_t d, std::vector<double> rowmajor);

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  const double* row(std::size_t i) const { return data_.data() + i * d_; }
  double at(std::size_t i, std::size_t j) const { return data_[i * d_ + j]; }
  const std::vector<double>& raw() const { return data_; }

  // New dataset keeping rows[i] for i in keep (order preserved).
  Dataset subset(const std::vector<std::size_t>& keep) const;

private:
  std::size_t n_, d_;
  std::vector<double> data_;
};

enum class Hypothesis : unsigned char { Null = 0, Alt = 1 };

enum class Decision { AcceptNull, Reject };

// Tester output. The statistics map carries one entry per executed check, so an
// early rejection still reports everything computed up to that point.
struct Verdict {
  Decision decision = Decision::AcceptNull;
  std::map<std::string, double> statistics;
};

// Testing-problem parameters. The standing regime is eps <= alpha < 1.
struct TestParams {
  std::size_t n = 0;
  std::size_t d = 0;
  double alpha = 0.0;
  double eps = 0.0;
  double delta = 0.01;
  double kappa = 3.0;

  // floor(eps * n): the number of adversarially corrupted points.
  std::size_t bad_count() const {
    return static_cast<std::size_t>(std::floor(eps * static_cast<double>(n)));
  }
  void validate() const;
};

// Per-point weights in [0, 1]^n.
using Weights = std::vector<double>;

void validate_weights(const Weights& w, std::size_t n);

double weight_mass(const Weights& w);  // ||w||_1

}  // namespace rmt
