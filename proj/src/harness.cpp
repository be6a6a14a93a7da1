#include "rmt/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "rmt/adaptive_tester.hpp"
#include "rmt/friendly_filter.hpp"
#include "rmt/kernels.hpp"
#include "rmt/lower_bounds.hpp"
#include "rmt/oblivious_tester.hpp"
#include "rmt/serialization.hpp"

namespace rmt {

namespace {

// Shortest decimal representation that parses back to the same double.
std::string num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

TestParams params_for(const GridPoint& gp,
                      const std::map<std::string, double>& constants) {
  TestParams p;
  p.n = gp.n;
  p.d = gp.d;
  p.alpha = gp.alpha;
  p.eps = gp.eps;
  p.delta = constant_or(constants, "delta", 0.01);
  p.kappa = constant_or(constants, "kappa", 3.0);
  return p;
}

LabeledDataset generate(Adversary adversary, const TestParams& params,
                        Hypothesis hypothesis,
                        const std::map<std::string, double>& constants,
                        RngStream& rng) {
  switch (adversary) {
    case Adversary::Clean:
      return gen_clean(params, hypothesis, rng);
    case Adversary::AdaptiveAntialign:
      return gen_adaptive_antialign(params, hypothesis, rng);
    case Adversary::HuberLB:
      if (hypothesis == Hypothesis::Null) return gen_clean(params, hypothesis, rng);
      return gen_huber_lb(params, rng);
    case Adversary::ObliviousNegmu:
      if (hypothesis == Hypothesis::Null) return gen_clean(params, hypothesis, rng);
      return gen_oblivious_negmu(params, rng);
    case Adversary::ObliviousLB: {
      if (hypothesis == Hypothesis::Null) return gen_clean(params, hypothesis, rng);
      double beta = constant_or(constants, "beta", -1.0);
      if (beta < 0.0) beta = set_beta(params.alpha, params.eps, params.n, params.d);
      return gen_oblivious_lb(params, ObliviousLBParams::from(params, beta), rng);
    }
    default:
      throw ArgumentError("generate: unsupported adversary");
  }
}

// The tester stage shared by the power loop and --replay.
TrialOutcome run_tester(TesterKind tester, const Dataset& data,
                        const TestParams& params,
                        const std::map<std::string, double>& constants,
                        RngStream& filter_rng) {
  TrialOutcome out;
  double nn = static_cast<double>(data.n()), dd = static_cast<double>(data.d());
  switch (tester) {
    case TesterKind::PlainNorm: {
      std::vector<double> s = weighted_sum(data, Weights(data.n(), 1.0));
      out.stat = std::fabs(norm2(s.data(), data.d()) - nn * dd);
      out.reject = out.stat > 0.01 * params.alpha * params.alpha * nn * nn;
      return out;
    }
    case TesterKind::SumVariance: {
      double lg = std::log(nn / params.delta);
      double norm_dev = 10.0 * std::sqrt(dd * lg);
      double pair_bound = 10.0 * std::sqrt(dd) * lg;
      std::vector<std::size_t> pre = prefilter_norms_pairs(data, norm_dev, pair_bound);
      if (pre.size() < 2) {
        out.flagged = true;
        return out;
      }
      Dataset kept = data.subset(pre);
      std::size_t m =
          static_cast<std::size_t>(constant_or(constants, "m", 10.0));
      SearchBudget budget;
      std::vector<std::size_t> surv;
      try {
        surv = full_sample_splitting(kept, default_lambda(kept.n()), m,
                                     params.delta, filter_rng, budget);
      } catch (const FilterExhaustionError&) {
        out.flagged = true;
        return out;
      }
      if (surv.size() < 2) {
        out.flagged = true;
        return out;
      }
      Dataset final_data = kept.subset(surv);
      Verdict v = sum_variance_test(final_data, params,
                                    constant_or(constants, "gate_const", 1.0));
      out.reject = v.decision == Decision::Reject;
      out.stat = std::fabs(v.statistics.at("mean_dev"));
      return out;
    }
    case TesterKind::AdaptiveSpectral: {
      try {
        Verdict v = full_adaptive_test(
            data, params, constant_or(constants, "C", kAdaptiveDefaultC));
        out.reject = v.decision == Decision::Reject;
        out.stat = v.statistics.at("decision_stat");
      } catch (const InvariantError&) {
        out.flagged = true;
      }
      return out;
    }
  }
  throw ArgumentError("run_tester: unsupported tester");
}

const char* tester_name(TesterKind t) {
  switch (t) {
    case TesterKind::SumVariance: return "sum_variance";
    case TesterKind::AdaptiveSpectral: return "adaptive_spectral";
    case TesterKind::PlainNorm: return "plain_norm";
  }
  return "?";
}

const char* adversary_name(Adversary a) {
  switch (a) {
    case Adversary::Clean: return "clean";
    case Adversary::HuberLB: return "huber_lb";
    case Adversary::ObliviousLB: return "oblivious_lb";
    case Adversary::ObliviousNegmu: return "oblivious_negmu";
    case Adversary::AdaptiveAntialign: return "adaptive_antialign";
    default: return "?";
  }
}

}  // namespace

double constant_or(const std::map<std::string, double>& constants,
                   const std::string& name, double fallback) {
  auto it = constants.find(name);
  return it == constants.end() ? fallback : it->second;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("ExperimentConfig: trials must be >= 1");
  if (grid.empty()) throw ConfigError("ExperimentConfig: grid must be nonempty");
  for (const GridPoint& gp : grid) {
    try {
      params_for(gp, constants).validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("ExperimentConfig: bad grid point: ") + e.what());
    }
  }
}

double wilson_halfwidth(std::size_t successes, std::size_t trials) {
  if (trials == 0) return 1.0;
  const double z = 1.959963984540054;
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  return z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
}

TrialOutcome run_single_trial(TesterKind tester, const GridPoint& point,
                              Adversary adversary, Hypothesis hypothesis,
                              const std::map<std::string, double>& constants,
                              const RngStream& rng) {
  TestParams params = params_for(point, constants);
  params.validate();
  RngStream gen_rng = rng.substream(0);
  RngStream filter_rng = rng.substream(1);
  LabeledDataset lds = generate(adversary, params, hypothesis, constants, gen_rng);
  return run_tester(tester, lds.data, params, constants, filter_rng);
}

PowerReport run_power_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  PowerReport report;
  report.config = cfg;
  RngStream root(cfg.seed);

  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    PowerCell cell;
    cell.point = cfg.grid[g];
    std::size_t tasks = 2 * cfg.trials;
    std::vector<TrialOutcome> out(tasks);
    std::vector<std::uint8_t> hard(tasks, 0);
    std::vector<std::string> message(tasks);
    RngStream cell_rng = root.substream(g);

    auto t0 = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic)
    for (std::size_t idx = 0; idx < tasks; ++idx) {
      std::size_t t = idx / 2;
      Hypothesis hyp = idx % 2 == 0 ? Hypothesis::Null : Hypothesis::Alt;
      RngStream trial_rng =
          cell_rng.substream(t).substream(static_cast<std::uint64_t>(idx % 2));
      try {
        out[idx] = run_single_trial(cfg.tester, cfg.grid[g], cfg.adversary, hyp,
                                    cfg.constants, trial_rng);
      } catch (const std::exception& e) {
        hard[idx] = 1;
        message[idx] = e.what();
      } catch (...) {
        hard[idx] = 1;
        message[idx] = "unknown error";
      }
    }
    cell.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (std::size_t idx = 0; idx < tasks; ++idx)
      if (hard[idx])
        throw ExperimentError("run_power_experiment: trial failed: " + message[idx]);

    std::size_t rej[2] = {0, 0}, flg[2] = {0, 0};
    double stat[2] = {0.0, 0.0};
    for (std::size_t idx = 0; idx < tasks; ++idx) {
      std::size_t h = idx % 2;
      if (out[idx].flagged) {
        ++flg[h];
        continue;
      }
      rej[h] += out[idx].reject ? 1 : 0;
      stat[h] += out[idx].stat;
    }
    for (std::size_t h = 0; h < 2; ++h)
      if (static_cast<double>(flg[h]) > 0.1 * static_cast<double>(cfg.trials))
        throw ExperimentError(
            "run_power_experiment: more than 10% of trials flagged in a cell");

    std::size_t ok_null = cfg.trials - flg[0], ok_alt = cfg.trials - flg[1];
    cell.flagged_null = flg[0];
    cell.flagged_alt = flg[1];
    cell.type1 = static_cast<double>(rej[0]) / static_cast<double>(ok_null);
    cell.power = static_cast<double>(rej[1]) / static_cast<double>(ok_alt);
    cell.type1_halfwidth = wilson_halfwidth(rej[0], ok_null);
    cell.power_halfwidth = wilson_halfwidth(rej[1], ok_alt);
    cell.mean_stat_null = stat[0] / static_cast<double>(ok_null);
    cell.mean_stat_alt = stat[1] / static_cast<double>(ok_alt);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

std::string power_report_csv(const PowerReport& report) {
  std::string text =
      "d,n,eps,alpha,trials,type1,type1_halfwidth,power,power_halfwidth,"
      "mean_stat_null,mean_stat_alt,flagged_null,flagged_alt\n";
  for (const PowerCell& c : report.cells) {
    text += std::to_string(c.point.d) + ',' + std::to_string(c.point.n) + ',' +
            num(c.point.eps) + ',' + num(c.point.alpha) + ',' +
            std::to_string(report.config.trials) + ',' + num(c.type1) + ',' +
            num(c.type1_halfwidth) + ',' + num(c.power) + ',' +
            num(c.power_halfwidth) + ',' + num(c.mean_stat_null) + ',' +
            num(c.mean_stat_alt) + ',' + std::to_string(c.flagged_null) + ',' +
            std::to_string(c.flagged_alt) + '\n';
  }
  return text;
}

std::string power_report_json(const PowerReport& report) {
  nlohmann::json j;
  j["tester"] = tester_name(report.config.tester);
  j["adversary"] = adversary_name(report.config.adversary);
  j["trials"] = report.config.trials;
  j["seed"] = report.config.seed;
  j["cells"] = nlohmann::json::array();
  for (const PowerCell& c : report.cells) {
    nlohmann::json cell;
    cell["d"] = c.point.d;
    cell["n"] = c.point.n;
    cell["eps"] = c.point.eps;
    cell["alpha"] = c.point.alpha;
    cell["type1"] = c.type1;
    cell["type1_halfwidth"] = c.type1_halfwidth;
    cell["power"] = c.power;
    cell["power_halfwidth"] = c.power_halfwidth;
    cell["mean_stat_null"] = c.mean_stat_null;
    cell["mean_stat_alt"] = c.mean_stat_alt;
    cell["flagged_null"] = c.flagged_null;
    cell["flagged_alt"] = c.flagged_alt;
    cell["wall_seconds"] = c.wall_seconds;
    j["cells"].push_back(std::move(cell));
  }
  return j.dump(2) + "\n";
}

void PhaseConfig::validate() const {
  if (d == 0) throw ConfigError("PhaseConfig: d must be positive");
  if (eps_values.empty() || alpha_values.empty())
    throw ConfigError("PhaseConfig: grids must be nonempty");
  for (double e : eps_values)
    if (!(e > 0.0) || !std::isfinite(e))
      throw ConfigError("PhaseConfig: eps values must be positive");
  for (double a : alpha_values)
    if (!(a > 0.0) || !std::isfinite(a))
      throw ConfigError("PhaseConfig: alpha values must be positive");
}

std::vector<PhaseRow> sweep_phase_diagram(const PhaseConfig& cfg) {
  cfg.validate();
  double dd = static_cast<double>(cfg.d);
  std::vector<PhaseRow> rows;
  rows.reserve(cfg.eps_values.size() * cfg.alpha_values.size());
  for (double eps : cfg.eps_values) {
    for (double alpha : cfg.alpha_values) {
      PhaseRow row;
      row.eps = eps;
      row.alpha = alpha;
      double a2 = alpha * alpha, a4 = a2 * a2;
      double v0 = std::sqrt(dd) / a2;
      double v1 = dd * eps * eps * eps / a4;
      double v2 = std::pow(dd, 2.0 / 3.0) * std::pow(eps, 2.0 / 3.0) /
                  std::pow(alpha, 8.0 / 3.0);
      double v3 = dd * eps / a2;
      double vmin = std::min(v2, v3);
      row.oblivious_n = v0 + v1 + vmin;
      row.adaptive_n = v0 + dd * eps * eps / a4;
      row.infeasible = alpha <= eps;
      if (!row.infeasible) {
        double top = std::max(v0, std::max(v1, vmin));
        row.dominant = v0 == top ? 0 : v1 == top ? 1 : v2 <= v3 ? 2 : 3;
        row.separation = row.oblivious_n < row.adaptive_n;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string phase_csv(const std::vector<PhaseRow>& rows) {
  std::string text = "eps,alpha,infeasible,dominant,oblivious_n,adaptive_n,separation\n";
  for (const PhaseRow& r : rows) {
    text += num(r.eps) + ',' + num(r.alpha) + ',' + (r.infeasible ? "1" : "0") + ',' +
            std::to_string(r.dominant) + ',' + num(r.oblivious_n) + ',' +
            num(r.adaptive_n) + ',' + (r.separation ? "1" : "0") + '\n';
  }
  return text;
}

std::string phase_svg(const PhaseConfig& cfg, const std::vector<PhaseRow>& rows,
                      bool include_meta) {
  const double width = 760.0, height = 560.0, margin = 70.0;
  const double plot_w = width - 2.0 * margin, plot_h = height - 2.0 * margin;
  double eps_lo = cfg.eps_values.front(), eps_hi = cfg.eps_values.front();
  for (double e : cfg.eps_values) {
    eps_lo = std::min(eps_lo, e);
    eps_hi = std::max(eps_hi, e);
  }
  double a_lo = cfg.alpha_values.front(), a_hi = cfg.alpha_values.front();
  for (double a : cfg.alpha_values) {
    a_lo = std::min(a_lo, a);
    a_hi = std::max(a_hi, a);
  }
  auto xpos = [&](double eps) {
    return eps_hi == eps_lo ? margin + plot_w / 2.0
                            : margin + (eps - eps_lo) / (eps_hi - eps_lo) * plot_w;
  };
  auto ypos = [&](double alpha) {
    return a_hi == a_lo ? margin + plot_h / 2.0
                        : height - margin - (alpha - a_lo) / (a_hi - a_lo) * plot_h;
  };
  static const char* kColors[4] = {"#4c78a8", "#f58518", "#54a24b", "#e45756"};
  static const char* kLabels[4] = {"sqrt(d)/a^2", "d e^3/a^4", "d^(2/3) e^(2/3)/a^(8/3)",
                                   "d e/a^2"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\">\n";
  if (include_meta) {
    std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    svg << "<!-- generated " << stamp << " -->\n";
  }
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  svg << "<rect x=\"" << margin << "\" y=\"" << height - margin << "\" width=\""
      << plot_w << "\" height=\"1.5\" fill=\"#222222\"/>\n";
  svg << "<rect x=\"" << margin - 1.5 << "\" y=\"" << margin << "\" width=\"1.5\""
      << " height=\"" << plot_h << "\" fill=\"#222222\"/>\n";
  svg << "<text x=\"" << width / 2.0 << "\" y=\"" << height - margin / 3.0
      << "\" font-size=\"15\" text-anchor=\"middle\">eps</text>\n";
  svg << "<text x=\"" << margin / 3.0 << "\" y=\"" << height / 2.0
      << "\" font-size=\"15\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << margin / 3.0 << ' ' << height / 2.0 << ")\">alpha</text>\n";
  svg << "<text x=\"" << margin << "\" y=\"" << height - margin + 20.0
      << "\" font-size=\"12\" text-anchor=\"middle\">" << num(eps_lo) << "</text>\n";
  svg << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 20.0
      << "\" font-size=\"12\" text-anchor=\"middle\">" << num(eps_hi) << "</text>\n";
  svg << "<text x=\"" << margin - 8.0 << "\" y=\"" << height - margin + 4.0
      << "\" font-size=\"12\" text-anchor=\"end\">" << num(a_lo) << "</text>\n";
  svg << "<text x=\"" << margin - 8.0 << "\" y=\"" << margin + 4.0
      << "\" font-size=\"12\" text-anchor=\"end\">" << num(a_hi) << "</text>\n";
  svg << "<text x=\"" << margin << "\" y=\"" << margin / 2.0
      << "\" font-size=\"15\">dominant complexity term, d=" << cfg.d
      << " (ring: oblivious &lt; adaptive)</text>\n";
  for (int k = 0; k < 4; ++k) {
    double ly = margin + 18.0 * (k + 1);
    svg << "<circle cx=\"" << width - margin - 150.0 << "\" cy=\"" << ly - 4.0
        << "\" r=\"5\" fill=\"" << kColors[k] << "\"/>\n";
    svg << "<text x=\"" << width - margin - 140.0 << "\" y=\"" << ly
        << "\" font-size=\"12\">" << kLabels[k] << "</text>\n";
  }
  for (const PhaseRow& r : rows) {
    const char* fill = r.infeasible ? "#bbbbbb" : kColors[r.dominant];
    svg << "<circle cx=\"" << xpos(r.eps) << "\" cy=\"" << ypos(r.alpha)
        << "\" r=\"5\" fill=\"" << fill << '"';
    if (r.separation) svg << " stroke=\"#000000\" stroke-width=\"1.5\"";
    svg << "/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(line_no) + ": bad number '" +
                      text + "'");
  }
  if (used != text.size())
    throw ConfigError("config line " + std::to_string(line_no) + ": bad number '" +
                      text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text, std::size_t line_no) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(line_no) + ": bad integer '" +
                      text + "'");
  }
  if (used != text.size() || text[0] == '-')
    throw ConfigError("config line " + std::to_string(line_no) + ": bad integer '" +
                      text + "'");
  return v;
}

TesterKind tester_from_name(const std::string& name, std::size_t line_no) {
  if (name == "sum_variance") return TesterKind::SumVariance;
  if (name == "adaptive_spectral") return TesterKind::AdaptiveSpectral;
  if (name == "plain_norm") return TesterKind::PlainNorm;
  throw ConfigError("config line " + std::to_string(line_no) + ": unknown tester '" +
                    name + "'");
}

Adversary adversary_from_name(const std::string& name, std::size_t line_no) {
  if (name == "clean") return Adversary::Clean;
  if (name == "huber_lb") return Adversary::HuberLB;
  if (name == "oblivious_lb") return Adversary::ObliviousLB;
  if (name == "oblivious_negmu") return Adversary::ObliviousNegmu;
  if (name == "adaptive_antialign") return Adversary::AdaptiveAntialign;
  throw ConfigError("config line " + std::to_string(line_no) +
                    ": unknown adversary '" + name + "'");
}

}  // namespace

ExperimentConfig parse_experiment_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section != "experiment" && section != "grid" && section != "constants")
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos || section.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value inside a section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");

    if (section == "experiment") {
      if (key == "tester") {
        cfg.tester = tester_from_name(value, line_no);
      } else if (key == "adversary") {
        cfg.adversary = adversary_from_name(value, line_no);
      } else if (key == "trials") {
        cfg.trials = static_cast<std::size_t>(parse_u64(value, line_no));
      } else if (key == "seed") {
        cfg.seed = parse_u64(value, line_no);
      } else if (key == "output_dir") {
        cfg.output_dir = value;
      } else {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown experiment key '" + key + "'");
      }
    } else if (section == "grid") {
      if (key != "point")
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown grid key '" + key + "'");
      std::istringstream fields(value);
      GridPoint gp;
      std::string extra;
      if (!(fields >> gp.d >> gp.n >> gp.eps >> gp.alpha) || (fields >> extra))
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": point needs exactly 'd n eps alpha'");
      cfg.grid.push_back(gp);
    } else {
      cfg.constants[key] = parse_double(value, line_no);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config_text(buf.str());
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path);
  out << text;
}

std::vector<double> linspace(double lo, double hi, std::size_t steps) {
  std::vector<double> v;
  if (steps == 1) {
    v.push_back(lo);
    return v;
  }
  for (std::size_t i = 0; i < steps; ++i)
    v.push_back(lo + (hi - lo) * static_cast<double>(i) /
                         static_cast<double>(steps - 1));
  return v;
}

int cli_dispatch(const std::vector<std::string>& args);

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return cli_dispatch(args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "experiment error: %s\n", e.what());
    return 3;
  }
}

namespace {

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"robust Gaussian mean testing toolkit"};
  app.require_subcommand(1);

  // power
  auto* power = app.add_subcommand("power", "Monte Carlo power/size experiment");
  std::string power_config, power_out, power_format = "csv", power_replay;
  std::uint64_t power_seed = 0;
  int power_threads = 0;
  bool power_seed_given = false;
  power->add_option("--config", power_config, "experiment config file")->required();
  power->add_option("--seed", power_seed, "override the config seed")
      ->each([&](const std::string&) { power_seed_given = true; });
  power->add_option("--out", power_out, "override the config output_dir");
  power->add_option("--threads", power_threads, "worker thread count");
  power->add_option("--format", power_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  power->add_option("--replay", power_replay,
                    "run the configured tester once on a saved dataset");

  // phase
  auto* phase = app.add_subcommand("phase", "phase-diagram sweep over (eps, alpha)");
  std::size_t phase_d = 10000;
  double phase_eps_min = 0.01, phase_eps_max = 0.5;
  double phase_alpha_min = 0.01, phase_alpha_max = 0.5;
  std::size_t phase_eps_steps = 30, phase_alpha_steps = 30;
  std::string phase_out = ".";
  bool no_meta = false;
  phase->add_option("--d", phase_d, "fixed dimension");
  phase->add_option("--eps-min", phase_eps_min);
  phase->add_option("--eps-max", phase_eps_max);
  phase->add_option("--eps-steps", phase_eps_steps);
  phase->add_option("--alpha-min", phase_alpha_min);
  phase->add_option("--alpha-max", phase_alpha_max);
  phase->add_option("--alpha-steps", phase_alpha_steps);
  phase->add_option("--out", phase_out, "output directory");
  phase->add_flag("--no-meta", no_meta, "suppress the SVG timestamp comment");

  // chi2-huber
  auto* huber = app.add_subcommand("chi2-huber", "Huber chi-square estimate");
  HuberLBConfig hcfg;
  std::uint64_t huber_seed = 0;
  huber->add_option("--n", hcfg.n)->required();
  huber->add_option("--d", hcfg.d)->required();
  huber->add_option("--eps", hcfg.eps)->required();
  huber->add_option("--alpha", hcfg.alpha)->required();
  huber->add_option("--K", hcfg.K, "size window half-width in sigmas");
  huber->add_option("--trials", hcfg.trials);
  huber->add_option("--seed", huber_seed);

  // chi2-oblivious
  auto* obliv = app.add_subcommand("chi2-oblivious", "oblivious chi-square estimate");
  ObliviousLBConfig ocfg;
  std::uint64_t obliv_seed = 0;
  obliv->add_option("--n", ocfg.n)->required();
  obliv->add_option("--d", ocfg.d)->required();
  obliv->add_option("--eps", ocfg.eps)->required();
  obliv->add_option("--alpha", ocfg.alpha)->required();
  obliv->add_option("--beta", ocfg.beta, "coupling; negative derives it");
  obliv->add_option("--trials", ocfg.trials);
  obliv->add_option("--seed", obliv_seed);

  // lowdeg
  auto* lowdeg = app.add_subcommand("lowdeg", "low-degree likelihood-ratio norm bound");
  LowDegreeConfig lcfg;
  std::string lowdeg_mode = "exact";
  lowdeg->add_option("--n", lcfg.n)->required();
  lowdeg->add_option("--d", lcfg.d)->required();
  lowdeg->add_option("--eps", lcfg.eps)->required();
  lowdeg->add_option("--alpha", lcfg.alpha)->required();
  lowdeg->add_option("--degree", lcfg.D, "truncation degree");
  lowdeg->add_option("--mode", lowdeg_mode, "exact or rosenthal")
      ->check(CLI::IsMember({"exact", "rosenthal"}));
  lowdeg->add_option("--rosenthal-C", lcfg.rosenthal_C);
  lowdeg->add_option("--sphere-c", lcfg.sphere_c);

  // identity-check
  auto* ident = app.add_subcommand("identity-check", "determinant identity sweep");
  std::size_t ident_draws = 10000;
  std::uint64_t ident_seed = 7;
  ident->add_option("--draws", ident_draws);
  ident->add_option("--seed", ident_seed);

  // calibrate
  auto* calib = app.add_subcommand("calibrate", "calibrate the spectral-filter constant");
  std::size_t calib_trials = 200;
  std::uint64_t calib_seed = 0;
  calib->add_option("--trials", calib_trials);
  calib->add_option("--seed", calib_seed);

  std::vector<const char*> argv;
  argv.push_back("rmt");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the error message
    return code == 0 ? 0 : 2;
  }

  if (*power) {
    if (power_threads > 0) {
#ifdef _OPENMP
      omp_set_num_threads(power_threads);
#endif
    }
    ExperimentConfig cfg = parse_experiment_config(power_config);
    if (power_seed_given) cfg.seed = power_seed;
    if (!power_out.empty()) cfg.output_dir = power_out;

    if (!power_replay.empty()) {
      LoadedDataset loaded = load_dataset(power_replay);
      GridPoint gp{loaded.lds.data.d(), loaded.lds.data.n(), loaded.eps,
                   cfg.grid.front().alpha};
      TestParams params = params_for(gp, cfg.constants);
      params.validate();
      RngStream rng = RngStream(cfg.seed).substream(1);
      TrialOutcome out = run_tester(cfg.tester, loaded.lds.data, params,
                                    cfg.constants, rng);
      std::printf("reject,flagged,stat\n%d,%d,%s\n", out.reject ? 1 : 0,
                  out.flagged ? 1 : 0, num(out.stat).c_str());
      return 0;
    }

    PowerReport report = run_power_experiment(cfg);
    std::string text =
        power_format == "json" ? power_report_json(report) : power_report_csv(report);
    if (cfg.output_dir.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      std::filesystem::create_directories(cfg.output_dir);
      std::string path = cfg.output_dir + "/power." + power_format;
      write_text_file(path, text);
      std::printf("wrote %s (%zu cells)\n", path.c_str(), report.cells.size());
    }
    return 0;
  }

  if (*phase) {
    PhaseConfig cfg;
    cfg.d = phase_d;
    cfg.eps_values = linspace(phase_eps_min, phase_eps_max, phase_eps_steps);
    cfg.alpha_values = linspace(phase_alpha_min, phase_alpha_max, phase_alpha_steps);
    std::vector<PhaseRow> rows = sweep_phase_diagram(cfg);
    std::filesystem::create_directories(phase_out);
    write_text_file(phase_out + "/phase.csv", phase_csv(rows));
    write_text_file(phase_out + "/phase.svg", phase_svg(cfg, rows, !no_meta));
    std::printf("wrote %s/phase.csv and %s/phase.svg (%zu rows)\n", phase_out.c_str(),
                phase_out.c_str(), rows.size());
    return 0;
  }

  if (*huber) {
    RngStream rng(huber_seed);
    Chi2Estimate est = huber_chi2_estimate(hcfg, rng);
    std::printf("n,d,eps,alpha,K,trials,estimate,stderr,diverged\n");
    std::printf("%zu,%zu,%s,%s,%s,%zu,%s,%s,%d\n", hcfg.n, hcfg.d,
                num(hcfg.eps).c_str(), num(hcfg.alpha).c_str(), num(hcfg.K).c_str(),
                hcfg.trials, num(est.estimate).c_str(), num(est.stderr_).c_str(),
                est.diverged ? 1 : 0);
    return 0;
  }

  if (*obliv) {
    double beta = ocfg.beta < 0.0 ? set_beta(ocfg) : ocfg.beta;
    RngStream rng(obliv_seed);
    Chi2Estimate est = oblivious_chi2_estimate(ocfg, rng);
    std::printf("n,d,eps,alpha,beta,trials,estimate,stderr,diverged\n");
    std::printf("%zu,%zu,%s,%s,%s,%zu,%s,%s,%d\n", ocfg.n, ocfg.d,
                num(ocfg.eps).c_str(), num(ocfg.alpha).c_str(), num(beta).c_str(),
                ocfg.trials, num(est.estimate).c_str(), num(est.stderr_).c_str(),
                est.diverged ? 1 : 0);
    return 0;
  }

  if (*lowdeg) {
    LowDegreeMode mode = lowdeg_mode == "exact" ? LowDegreeMode::ExactMoments
                                                : LowDegreeMode::RosenthalBound;
    std::printf("%s\n", num(lowdegree_norm_bound(lcfg, mode)).c_str());
    return 0;
  }

  if (*ident) {
    RngStream rng(ident_seed);
    std::size_t passed = 0;
    for (std::size_t i = 0; i < ident_draws; ++i) {
      double alpha = rng.next_unit(), eps = rng.next_unit();
      double gamma = eps * rng.next_unit();
      std::size_t n = 10 + rng.next_below(991), d = 10 + rng.next_below(9991);
      double beta = 0.1 / static_cast<double>(n) * rng.next_unit();
      if (det_identity_check(alpha, beta, eps, gamma, n, d).ok) ++passed;
    }
    std::printf("passed %zu/%zu\n", passed, ident_draws);
    return passed == ident_draws ? 0 : 3;
  }

  if (*calib) {
    RngStream rng(calib_seed);
    std::printf("%s\n", num(calibrate_gamma2_C(rng, calib_trials)).c_str());
    return 0;
  }

  return 2;
}

}  // namespace

}  // namespace rmt
