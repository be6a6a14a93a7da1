#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmt/dataset.hpp"
#include "rmt/rng.hpp"

namespace rmt {

// Friendliness / balancedness verification and the sample-splitting filter
// pipeline. Exact verifiers enumerate subsets and exist for oracle-scale inputs;
// randomized modes are sound for violations and incomplete for ok.

struct BalancedParams {
  double lambda = 0.0;  // > 0
  std::size_t m = 0;
  std::size_t k = 0;
  void validate(std::size_t n) const;  // m <= n, k <= m^2
};

enum class SearchMode { Exact, Randomized };

struct SearchSpec {
  SearchMode mode = SearchMode::Exact;
  std::size_t trials = 10000;  // Randomized only
};

struct FriendlinessReport {
  bool ok = true;
  bool cross_sum_ok = true;   // clause: |<Sum(S),Sum(T)>| <= kappa sqrt(k1 k2) max(sqrt(eps n d), eps n)
  bool inner_product_ok = true;  // clause: |<X_i,X_j>| <= kappa sqrt(d)
  bool norm_ok = true;           // clause: | ||X_i||^2 - d | <= kappa sqrt(d)
  // Worst witnesses found for each clause (meaningful whether or not violated).
  std::vector<std::size_t> worst_S, worst_T;
  double worst_pair_value = 0.0;  // <Sum(S), Sum(T)>
  double worst_pair_bound = 0.0;  // clause bound at those sizes
  std::size_t worst_ip_i = 0, worst_ip_j = 0;
  double worst_ip_value = 0.0;
  std::size_t worst_norm_i = 0;
  double worst_norm_value = 0.0;  // ||X_i||^2 - d
};

// Exact mode requires n <= 16 (subset enumeration), else CapacityError.
FriendlinessReport check_friendly(const Dataset& data, double eps, double kappa,
                                  const SearchSpec& spec, RngStream& rng);

struct BalancedViolation {
  std::vector<std::size_t> s1, s2;
  double value = 0.0;  // <Sum(S1), Sum(S2)>
  double bound = 0.0;  // sqrt(lambda |S1||S2| d)
};

std::optional<BalancedViolation> check_balanced(const Dataset& data,
                                                const BalancedParams& p,
                                                const SearchSpec& spec, RngStream& rng);

// Directions are realized as Sum(T_i)/||Sum(T_i)|| over a reference dataset.
struct FilterSet {
  std::vector<std::vector<std::size_t>> directions;
  double gamma = 0.0;
};

// Survivors of data: points whose max |projection| onto every direction is < gamma
// (the removal test is inclusive, so gamma = 0 removes everything once l >= 1).
std::vector<std::size_t> apply_filter(const Dataset& data, const FilterSet& f,
                                      const Dataset& reference);

// JSON text round-trip for audit/replay.
std::string filter_set_to_json(const FilterSet& f);
FilterSet filter_set_from_json(const std::string& text);

struct SearchBudget {
  std::size_t max_candidate_collections = 10000;  // violating-pair draws per round
  std::size_t max_random_subsets = 1000;          // compression subsets per call
};

// The proof-scale constants are unusable numerically; these desk-scale defaults are
// calibrated so clean Gaussian data passes untouched while planted violations trip
// the checks. Negative override fields fall back to the formula defaults:
//   tau   = floor(tau_scale * s / ln n)
//   gamma = gamma_scale * sqrt(lambda/m)
//   check threshold = check_scale * sqrt(lambda |S1||S2| d)
struct FilterConstants {
  double tau_scale = 1.0 / 8.0;
  double gamma_scale = 3.0;
  double check_scale = 0.25;
  double compression_C = 1.0;
  double tau_override = -1.0;
  double gamma_override = -1.0;
};

double default_lambda(std::size_t n);  // 36 ln(max(n,3))

struct CompressionResult {
  std::vector<std::size_t> subset;  // S1' (indices into the dataset)
  std::size_t count = 0;            // achieved |{v in S2 : projection >= threshold}|
  double threshold = 0.0;           // sqrt(theta)/(16 sqrt(C m))
  double lemma_target = 0.0;        // theta |S2| / (80 lambda)
};

// Randomized search for a small S1' whose sum direction still catches many of S2.
// Requires |<Sum(S1),Sum(S2)>| >= sqrt(theta |S1||S2| d); a negative inner product
// is handled by flipping the direction sign internally. |S1'| is capped at
// max(1, floor(|S1||S2|/(C m))).
CompressionResult witness_compression(const Dataset& data,
                                      const std::vector<std::size_t>& s1,
                                      const std::vector<std::size_t>& s2, double theta,
                                      double lambda, double C, std::size_t m,
                                      RngStream& rng, std::size_t max_subsets);

class FilterExhaustionError : public std::runtime_error {
public:
  FilterExhaustionError(const std::string& msg, FilterSet best, std::size_t removed)
      : std::runtime_error(msg), best_filter(std::move(best)), removed_so_far(removed) {}
  FilterSet best_filter;        // the partial filter built before giving up
  std::size_t removed_so_far;   // points it removes from the construction split
};

// Instrumentation for the obliviousness-preservation contract: every row read goes
// through a logger, so a test can assert no B row is touched before the final apply.
struct IterationTrace {
  std::vector<std::size_t> a_indices, b_indices;
  std::vector<std::size_t> construct_reads;  // rows read while building the filter
  std::vector<std::size_t> apply_reads;      // rows read in the final apply step
  FilterSet filter;                          // directions as global index lists
  std::size_t rounds = 0;
  std::size_t candidates_used = 0;
  bool exact_pair_search = false;
};

// One splitting round: Bernoulli(p) split into A and B, build a filter from A alone
// (iterated violating-pair search + witness compression, exact pair search when the
// working set has at most 12 points), then return B minus the filter as global
// indices. Throws FilterExhaustionError when no clean filter fits the size cap.
std::vector<std::size_t> single_filtering_iteration(
    const Dataset& data, double lambda, std::size_t m, std::size_t k, std::size_t s,
    double p, RngStream& rng, const SearchBudget& budget,
    const FilterConstants& consts = FilterConstants{}, IterationTrace* trace = nullptr);

struct SplittingSchedule {
  std::size_t k0 = 0;  // min(m^2, m * max(1, ceil(ln(n m / delta))))
  std::size_t s0 = 0;  // min(m, max(2, ceil(ln(n m / delta))))
  double p = 0.0;      // 1 / (5 ln^2 max(m,3))
};

SplittingSchedule splitting_schedule(std::size_t n, std::size_t m, double delta);

// Doubling schedule over (k, s) driving single_filtering_iteration; discards each
// round's A split. Returns the final survivor set as global indices.
std::vector<std::size_t> full_sample_splitting(
    const Dataset& data, double lambda, std::size_t m, double delta, RngStream& rng,
    const SearchBudget& budget, const FilterConstants& consts = FilterConstants{});

// Hard removals: points with | ||X_i||^2 - d | >= norm_dev, and both members of
// every pair with |<X_i, X_j>| >= pair_bound.
std::vector<std::size_t> prefilter_norms_pairs(const Dataset& data, double norm_dev,
                                               double pair_bound);

}  // namespace rmt
