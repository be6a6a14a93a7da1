#pragma once

#include <cstdint>
#include <string>

#include "rmt/contamination.hpp"

namespace rmt {

// Flat little-endian binary format:
//   "RMT1" | n u64 | d u64 | eps_num u64 | eps_den u64 | hypothesis u8
//   | n*d f64 row-major | ceil(n/8) mask bytes (bit i of byte i/8, LSB first)
// eps is stored as the rational round(eps*1e9)/1e9. mu and the adversary tag are not
// part of the format; loading returns Adversary::Unspecified and a zero mu.

void save_dataset(const std::string& path, const LabeledDataset& lds, double eps);

struct LoadedDataset {
  LabeledDataset lds;
  double eps = 0.0;
};

LoadedDataset load_dataset(const std::string& path);

// One row per point: bad flag then the d coordinates. Header line included.
void export_csv(const std::string& path, const LabeledDataset& lds);

}  // namespace rmt
