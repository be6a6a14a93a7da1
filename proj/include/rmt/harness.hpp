#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rmt/contamination.hpp"
#include "rmt/dataset.hpp"
#include "rmt/rng.hpp"

namespace rmt {

// Experiment front-end: seeded Monte Carlo power studies over parameter grids,
// the phase-diagram sweep, the flat-text config format, and the CLI entry point.

enum class TesterKind { SumVariance, AdaptiveSpectral, PlainNorm };

struct GridPoint {
  std::size_t d = 0;
  std::size_t n = 0;
  double eps = 0.0;
  double alpha = 0.0;
};

// Named constant overrides consumed by the pipelines; every key is optional.
//   kappa       friendliness scale (default 3)
//   delta       failure budget for thresholds (default 0.01)
//   C           adaptive gamma2 constant (default kAdaptiveDefaultC)
//   gate_const  sum+variance gate scale (default 1)
//   m           friendly-filter subset size (default 10)
//   beta        oblivious_lb coupling; < 0 derives it via set_beta
double constant_or(const std::map<std::string, double>& constants,
                   const std::string& name, double fallback);

struct ExperimentConfig {
  TesterKind tester = TesterKind::PlainNorm;
  Adversary adversary = Adversary::Clean;
  std::vector<GridPoint> grid;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::map<std::string, double> constants;
  std::string output_dir;  // empty: callers print instead of writing

  // trials >= 1, grid nonempty, every point a valid TestParams (so eps <= alpha).
  void validate() const;
};

struct PowerCell {
  GridPoint point;
  double type1 = 0.0;  // reject rate under Null, over unflagged trials
  double power = 0.0;  // reject rate under Alt
  double type1_halfwidth = 0.0;  // Wilson 95% half-widths at those counts
  double power_halfwidth = 0.0;
  double mean_stat_null = 0.0;  // mean |decision statistic| over unflagged trials
  double mean_stat_alt = 0.0;
  std::size_t flagged_null = 0;  // trials ended by a filter invariant violation
  std::size_t flagged_alt = 0;
  double wall_seconds = 0.0;  // not part of the CSV contract
};

struct PowerReport {
  ExperimentConfig config;
  std::vector<PowerCell> cells;
};

// Half-width of the 95% Wilson score interval for `successes` out of `trials`.
double wilson_halfwidth(std::size_t successes, std::size_t trials);

struct TrialOutcome {
  bool reject = false;
  bool flagged = false;  // FilterExhaustionError or InvariantError inside the pipeline
  double stat = 0.0;     // |decision statistic|: |mean_dev| for the sum testers,
                         // decision_stat for the adaptive pipeline
};

// One simulation through the configured pipeline. Null cells pair every
// adversary with its null-side generator: Clean and AdaptiveAntialign take
// their Hypothesis argument; the committed-corruption attacks (HuberLB,
// ObliviousLB, ObliviousNegmu) define only the alternative, so their null is
// the clean one. Generation draws from rng.substream(0), filter randomness
// from rng.substream(1).
TrialOutcome run_single_trial(TesterKind tester, const GridPoint& point,
                              Adversary adversary, Hypothesis hypothesis,
                              const std::map<std::string, double>& constants,
                              const RngStream& rng);

// `trials` Null and `trials` Alt simulations per grid point; trial (g, t, hyp)
// draws from RngStream(seed).substream(g).substream(t).substream(hyp), and
// results land in a table indexed the same way, so the report is deterministic
// in (config, seed) at any thread count. Flagged trials are excluded from the
// rates; a cell with more than 10% flagged on either side throws
// ExperimentError.
PowerReport run_power_experiment(const ExperimentConfig& cfg);

// CSV: one header plus one row per cell; wall time excluded so identical
// (config, seed) gives byte-identical text. JSON carries the same fields plus
// wall_seconds.
std::string power_report_csv(const PowerReport& report);
std::string power_report_json(const PowerReport& report);

// Phase diagram over (eps, alpha) at fixed d. Complexity formulas, constants
// dropped:
//   oblivious: sqrt(d)/a^2 + d e^3/a^4 + min(d^{2/3} e^{2/3}/a^{8/3}, d e/a^2)
//   adaptive:  sqrt(d)/a^2 + d e^2/a^4
// dominant indexes the largest of {sqrt(d)/a^2, d e^3/a^4, active min term} in
// the listed order (first wins ties); -1 on infeasible rows (alpha <= eps).
struct PhaseConfig {
  std::size_t d = 10000;
  std::vector<double> eps_values;    // nonempty, positive
  std::vector<double> alpha_values;  // nonempty, positive
  void validate() const;
};

struct PhaseRow {
  double eps = 0.0;
  double alpha = 0.0;
  bool infeasible = false;
  int dominant = -1;  // 0 sqrt(d)/a^2, 1 d e^3/a^4, 2 d^{2/3} e^{2/3}/a^{8/3}, 3 d e/a^2
  double oblivious_n = 0.0;
  double adaptive_n = 0.0;
  bool separation = false;  // oblivious_n < adaptive_n strictly; false when infeasible
};

// Rows in eps-major order (alpha fastest), one per grid pair.
std::vector<PhaseRow> sweep_phase_diagram(const PhaseConfig& cfg);

std::string phase_csv(const std::vector<PhaseRow>& rows);
// Scatter colored by dominant term, gray for infeasible; rects, circles, and
// text only. include_meta adds a generation-time comment, the one byte-level
// nondeterminism the format allows.
std::string phase_svg(const PhaseConfig& cfg, const std::vector<PhaseRow>& rows,
                      bool include_meta);

// Flat sectioned text: [experiment] tester/adversary/trials/seed/output_dir,
// [grid] point = d n eps alpha (repeated), [constants] name = value. '#' starts
// a comment. Unknown sections or keys are ConfigError, as is an unreadable
// file (message carries the path).
ExperimentConfig parse_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config_text(const std::string& text);

// Subcommands: power, phase, chi2-huber, chi2-oblivious, lowdeg,
// identity-check, calibrate. Exit 0 on success, 2 on config/usage errors,
// 3 on experiment failures.
int run_cli(const std::vector<std::string>& args);

}  // namespace rmt
