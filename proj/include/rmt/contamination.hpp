#pragma once

#include <cstddef>
#include <vector>

#include "rmt/dataset.hpp"
#include "rmt/rng.hpp"

namespace rmt {

// Dataset generators for each adversary model. Obliviousness is enforced by stream
// discipline, not trust: every oblivious generator consumes its corruption stream
// completely before touching the good-sample stream, so regenerating with the same
// corruption stream and a perturbed good stream reproduces the corrupted rows and
// mask bit for bit. The single-stream overloads split substream(0) for corruption
// and substream(1) for good draws.

enum class Adversary : unsigned char {
  Clean = 0,
  HuberLB = 1,
  ObliviousLB = 2,
  ObliviousNegmu = 3,
  AdaptiveAntialign = 4,
  Unspecified = 255,
};

// Simulation ground truth. Testers never see this type: they take a Dataset, so the
// mask and true mean stay out of reach by construction.
struct LabeledDataset {
  Dataset data;
  std::vector<unsigned char> bad_mask;  // size n, 1 = corrupted
  Hypothesis hypothesis;
  std::vector<double> mu;  // size d, zero under Null
  Adversary adversary;

  std::size_t bad_total() const;
};

struct ObliviousLBParams {
  double beta = 0.0;  // coupling coefficient, regime 0 <= beta <= 0.1/n
  double alpha = 0.0;
  double eps = 0.0;
  std::size_t n = 0;
  std::size_t d = 0;

  static ObliviousLBParams from(const TestParams& p, double beta);
  void validate() const;
};

// All-good dataset. Under Alt the mean is alpha times a uniform random unit
// direction (or the supplied one); randomize_mu_norm stretches ||mu|| uniformly
// into [alpha, 2*alpha] instead of pinning it at alpha.
LabeledDataset gen_clean(const TestParams& params, Hypothesis hypothesis, RngStream& rng,
                         bool randomize_mu_norm = false);
LabeledDataset gen_clean(const TestParams& params, Hypothesis hypothesis,
                         const std::vector<double>& mu_direction, RngStream& rng,
                         bool randomize_mu_norm = false);

// Each point i.i.d. from (1-eps) N(alpha v, I) + eps N(-((1-eps)/eps) alpha v, I)
// with v ~ N(0, I/d); the mask marks the second component, so its size is
// Binomial(n, eps), not floor(eps n) -- the one generator where that holds.
// v, the mask, and the bad rows all come from the corruption stream.
LabeledDataset gen_huber_lb(const TestParams& params, RngStream& corrupt_rng,
                            RngStream& good_rng);
LabeledDataset gen_huber_lb(const TestParams& params, RngStream& rng);

// Corruption stream commits A (|A| = floor(eps n)), the rows X_A ~ N(0, I), and
// z ~ N(0, (alpha^2/d) I); then mu = -beta Sum(A) - z and the good rows follow
// N(mu, I) from the good stream.
LabeledDataset gen_oblivious_lb(const TestParams& params, const ObliviousLBParams& lb,
                                RngStream& corrupt_rng, RngStream& good_rng);
LabeledDataset gen_oblivious_lb(const TestParams& params, const ObliviousLBParams& lb,
                                RngStream& rng);

// Alt-only attack that knows mu = alpha u but not the good draws: each bad row gets
// projection exactly -alpha/eps onto u, with its orthogonal part rescaled to keep
// ||X||^2 within d +- 10 sqrt(d log n) when possible.
LabeledDataset gen_oblivious_negmu(const TestParams& params, RngStream& corrupt_rng,
                                   RngStream& good_rng);
LabeledDataset gen_oblivious_negmu(const TestParams& params, RngStream& rng);

// Adaptive: draws all good points first, then replaces floor(eps n) uniformly chosen
// rows with copies of -sqrt(d) Sum(kept)/||Sum(kept)||. Intentionally violates the
// obliviousness contract (bad rows depend on the good stream).
LabeledDataset gen_adaptive_antialign(const TestParams& params, Hypothesis hypothesis,
                                      RngStream& corrupt_rng, RngStream& good_rng);
LabeledDataset gen_adaptive_antialign(const TestParams& params, Hypothesis hypothesis,
                                      RngStream& rng);

}  // namespace rmt
