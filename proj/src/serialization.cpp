#include "rmt/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace rmt {
namespace {

constexpr char kMagic[4] = {'R', 'M', 'T', '1'};
constexpr std::uint64_t kEpsDen = 1000000000ULL;

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw ArgumentError("load_dataset: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_dataset(const std::string& path, const LabeledDataset& lds, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ArgumentError("save_dataset: eps out of range");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("save_dataset: cannot open " + path);
  out.write(kMagic, 4);
  std::size_t n = lds.data.n(), d = lds.data.d();
  put_u64(out, n);
  put_u64(out, d);
  put_u64(out, static_cast<std::uint64_t>(std::llround(eps * static_cast<double>(kEpsDen))));
  put_u64(out, kEpsDen);
  char hyp = static_cast<char>(lds.hypothesis);
  out.write(&hyp, 1);
  // Doubles as raw LE bytes; this targets little-endian hosts.
  out.write(reinterpret_cast<const char*>(lds.data.raw().data()),
            static_cast<std::streamsize>(n * d * sizeof(double)));
  std::vector<unsigned char> bits((n + 7) / 8, 0);
  for (std::size_t i = 0; i < n; ++i)
    if (lds.bad_mask[i]) bits[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
  out.write(reinterpret_cast<const char*>(bits.data()),
            static_cast<std::streamsize>(bits.size()));
  if (!out) throw ArgumentError("save_dataset: write failed for " + path);
}

LoadedDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("load_dataset: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ArgumentError("load_dataset: bad magic");
  std::uint64_t n = get_u64(in), d = get_u64(in);
  std::uint64_t num = get_u64(in), den = get_u64(in);
  if (den == 0) throw ArgumentError("load_dataset: zero eps denominator");
  char hyp;
  in.read(&hyp, 1);
  if (!in || (hyp != 0 && hyp != 1)) throw ArgumentError("load_dataset: bad hypothesis byte");
  if (n == 0 || d == 0 || n > (1ULL << 32) || d > (1ULL << 32))
    throw ArgumentError("load_dataset: implausible dimensions");
  std::vector<double> rows(n * d);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(n * d * sizeof(double)));
  std::vector<unsigned char> bits((n + 7) / 8);
  in.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  if (!in) throw ArgumentError("load_dataset: truncated payload");
  std::vector<unsigned char> mask(n, 0);
  for (std::uint64_t i = 0; i < n; ++i)
    mask[i] = (bits[i / 8] >> (i % 8)) & 1u;
  LoadedDataset out{LabeledDataset{Dataset(n, d, std::move(rows)), std::move(mask),
                                   static_cast<Hypothesis>(hyp),
                                   std::vector<double>(d, 0.0), Adversary::Unspecified},
                    static_cast<double>(num) / static_cast<double>(den)};
  return out;
}

void export_csv(const std::string& path, const LabeledDataset& lds) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("export_csv: cannot open " + path);
  std::size_t n = lds.data.n(), d = lds.data.d();
  out << "bad";
  for (std::size_t j = 0; j < d; ++j) out << ",x" << j;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    out << static_cast<int>(lds.bad_mask[i]);
    for (std::size_t j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", lds.data.at(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw ArgumentError("export_csv: write failed for " + path);
}

}  // namespace rmt
