#include "rmt/dataset.hpp"

#include <cmath>

namespace rmt {

Dataset::Dataset(std::size_t n, std::size_t d, std::vector<double> rowmajor)
    : n_(n), d_(d), data_(std::move(rowmajor)) {
  if (n_ == 0 || d_ == 0) throw ArgumentError("Dataset: n and d must be positive");
  if (data_.size() != n_ * d_)
    throw ArgumentError("Dataset: buffer size does not match n*d");
  for (double v : data_)
    if (!std::isfinite(v)) throw ArgumentError("Dataset: entries must be finite");
}

Dataset Dataset::subset(const std::vector<std::size_t>& keep) const {
  std::vector<double> out;
  out.reserve(keep.size() * d_);
  for (std::size_t i : keep) {
    if (i >= n_) throw ArgumentError("Dataset::subset: index out of range");
    out.insert(out.end(), row(i), row(i) + d_);
  }
  return Dataset(keep.size(), d_, std::move(out));
}

void TestParams::validate() const {
  if (n == 0 || d == 0) throw ArgumentError("TestParams: n and d must be positive");
  if (!(alpha > 0.0)) throw ArgumentError("TestParams: alpha must be positive");
  if (!(eps >= 0.0 && eps < 1.0)) throw ArgumentError("TestParams: eps must lie in [0,1)");
  if (eps > alpha) throw ArgumentError("TestParams: eps <= alpha is required");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("TestParams: delta must lie in (0,1)");
  if (!(kappa > 0.0)) throw ArgumentError("TestParams: kappa must be positive");
}

void validate_weights(const Weights& w, std::size_t n) {
  if (w.size() != n) throw ArgumentError("weights: size must equal n");
  for (double v : w)
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("weights: entries must lie in [0,1]");
}

double weight_mass(const Weights& w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

}  // namespace rmt
