// diffint: phase-noise calculator for differential atom interferometers.
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical
// failure, 3 Monte Carlo disagreement.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diffint/diffint.hpp"

namespace {

using namespace diffint;

enum Exit { ok = 0, usage = 1, numerical = 2, disagreement = 3 };

struct Common {
  std::string config_path;
  std::string preset = "ideal";
  std::optional<double> nbar;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  bool decoherence = false;
  bool optimize_delta = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value parameter file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset, "base parameter set")->check(CLI::IsMember({"ideal", "realistic"}));
}

Config resolve(const Common& c) {
  Config cfg = preset_config(*parse_preset(c.preset));
  if (!c.config_path.empty()) cfg = load_config(c.config_path, cfg);
  if (c.nbar) {
    if (!(*c.nbar > 0.0)) throw ConfigError("--nbar must be positive");
    cfg.nbar = *c.nbar;
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.samples) {
    if (*c.samples < 1000) throw ConfigError("--samples must be at least 1000");
    cfg.samples = *c.samples;
  }
  if (c.decoherence) cfg.decoherence = true;
  if (c.optimize_delta) cfg.optimize_delta = true;
  return cfg;
}

Scheme scheme_from(const std::string& name) {
  const auto s = parse_scheme(name);
  if (!s) throw ConfigError("unknown scheme '" + name + "' (cs, ss, ss+, js, js+, js+c, ee)");
  return *s;
}

std::vector<Scheme> schemes_from(const std::vector<std::string>& names, bool all_by_default) {
  std::vector<Scheme> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.assign(all_schemes.begin(), all_schemes.end());
      return out;
    }
    out.push_back(scheme_from(n));
  }
  if (out.empty() && all_by_default) out.assign(all_schemes.begin(), all_schemes.end());
  return out;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw OptimizationFailed(std::string(what) + " is not finite");
}

/// Closed-form estimate at the configured point, honoring --optimize-delta
/// and --decoherence.
struct PointResult {
  PhaseEstimate estimate;
  double detuning = 0.0;
  double chi = 0.0;
};

PointResult point_estimate(const Config& cfg, Scheme scheme) {
  const EnsembleConfig ens = cfg.ensemble();
  const SchemeId id = cfg.scheme(scheme);
  PointResult r;
  if (scheme == Scheme::cs) {
    r.estimate = eval_cs(ens);
    return r;
  }
  if (cfg.optimize_delta) {
    DetuningSearch search;
    search.include_decoherence = cfg.decoherence;
    const auto opt = optimize_detuning(cfg.physical, ens, id, search);
    r.estimate = opt.estimate;
    r.detuning = opt.detuning;
    r.chi = opt.chi;
    return r;
  }
  r.detuning = cfg.physical.detuning;
  r.chi = cfg.chi_used();
  r.estimate = evaluate(id, ens, cfg.light());
  if (cfg.decoherence) r.estimate = corrected_variance(r.estimate, scheme, cfg.decoherence_params(), ens);
  return r;
}

int cmd_variance(const Common& c, const std::string& scheme_name_arg) {
  const Config cfg = resolve(c);
  const Scheme scheme = scheme_from(scheme_name_arg);
  const PointResult r = point_estimate(cfg, scheme);
  const auto& b = r.estimate.breakdown;
  const double cs = eval_cs(cfg.ensemble()).variance();
  require_finite(r.estimate.variance(), "variance");
  std::printf("scheme        %s\n", std::string(scheme_name(scheme)).c_str());
  std::printf("N_bar         %.6e\n", cfg.nbar);
  if (scheme != Scheme::cs) std::printf("detuning      %.6e s^-1\nchi           %.6e\n", r.detuning, r.chi);
  std::printf("mean          %+.10e rad\n", r.estimate.mean);
  std::printf("projection    %.10e\n", b.projection);
  std::printf("detection     %.10e\n", b.detection);
  std::printf("mismatch      %.10e\n", b.mismatch);
  std::printf("decoherence   %.10e\n", b.decoherence);
  std::printf("variance      %.10e rad^2\n", r.estimate.variance());
  std::printf("ratio to cs   %.10e (%+.3f dB)\n", r.estimate.variance() / cs,
              10.0 * std::log10(r.estimate.variance() / cs));
  for (const auto& [label, value] : r.estimate.bias_terms) std::printf("bias %-8s %+.10e rad\n", label.c_str(), value);
  return ok;
}

int cmd_sweep(const Common& c, const std::vector<std::string>& schemes, std::optional<double> nbar_min,
              std::optional<double> nbar_max, std::optional<int> points, bool no_bias, const std::string& out,
              const std::string& svg) {
  const Config cfg = resolve(c);
  SweepSpec spec = preset_sweep(*parse_preset(c.preset));
  spec.base = cfg;
  spec.optimize_detuning = cfg.optimize_delta;
  spec.include_decoherence = cfg.decoherence;
  spec.include_bias_in_variance = !no_bias;
  if (!schemes.empty()) spec.schemes = schemes_from(schemes, false);
  if (nbar_min) spec.nbar_min = *nbar_min;
  if (nbar_max) spec.nbar_max = *nbar_max;
  if (points) spec.points = *points;
  const auto rows = run_sweep(spec);
  for (const auto& r : rows) require_finite(r.variance, "sweep variance");
  if (out.empty() || out == "-")
    std::cout << format_csv(rows);
  else
    emit_csv(rows, out);
  if (!svg.empty()) emit_svg(rows, svg);
  return ok;
}

int cmd_mc(const Common& c, const std::vector<std::string>& schemes) {
  const Config cfg = resolve(c);
  const EnsembleConfig ens = cfg.ensemble();
  const LightConfig light = cfg.light();
  const McOptions opts = cfg.mc_options();
  std::printf("N_bar %.4e  n %.4e  chi %.4e  alpha %.3e  gamma %.3e  samples %llu  seed %llu\n", cfg.nbar,
              light.photons, light.chi, cfg.alpha, cfg.gamma, static_cast<unsigned long long>(opts.n_samples),
              static_cast<unsigned long long>(opts.seed));
  bool all_ok = true;
  for (Scheme s : schemes_from(schemes, true)) {
    if (s == Scheme::ee) {
      const auto r = compare_ee_mc(ens, light, cfg.tilt, opts);
      std::cout << format_comparison(r.phi, "ee/phi") << format_comparison(r.theta, "ee/th");
      all_ok = all_ok && r.agrees();
      continue;
    }
    const auto r = compare_mc(ens, light, cfg.scheme(s), opts);
    std::cout << format_comparison(r);
    all_ok = all_ok && r.agrees();
  }
  std::printf("%s\n", all_ok ? "agreement" : "DISAGREEMENT");
  return all_ok ? ok : disagreement;
}

int cmd_optimize(const Common& c, const std::string& scheme_arg) {
  Config cfg = resolve(c);
  const Scheme scheme = scheme_from(scheme_arg);
  if (scheme == Scheme::cs) throw ConfigError("optimize: the coherent scheme uses no probe light");
  DetuningSearch search;
  search.include_decoherence = true;
  const auto opt = optimize_detuning(cfg.physical, cfg.ensemble(), cfg.scheme(scheme), search);
  require_finite(opt.min_variance, "minimum variance");
  const double cs = eval_cs(cfg.ensemble()).variance();
  std::printf("scheme          %s\n", std::string(scheme_name(scheme)).c_str());
  std::printf("detuning        %.10e s^-1 (%.3f linewidths)\n", opt.detuning, opt.detuning / cfg.physical.linewidth);
  std::printf("chi             %.10e\n", opt.chi);
  std::printf("min variance    %.10e rad^2 (%+.3f dB vs cs)\n", opt.min_variance,
              10.0 * std::log10(opt.min_variance / cs));
  std::printf("far-detuned     %.10e rad^2\n", opt.analytic_min);
  return ok;
}

int cmd_sagnac(double area, double rate, double wavelength, double mass) {
  const double atom = sagnac_phase(area, rate, mass);
  const double light = light_sagnac_phase(area, rate, wavelength);
  require_finite(atom / light, "phase ratio");
  std::printf("atom phase      %.10e rad\n", atom);
  std::printf("light phase     %.10e rad\n", light);
  std::printf("ratio           %.6e\n", atom / light);
  return ok;
}

int cmd_check(const Common& c, const std::vector<std::string>& schemes) {
  const Config cfg = resolve(c);
  for (Scheme s : schemes_from(schemes, true)) {
    const auto report = check_assumptions(cfg.ensemble(), cfg.light(), cfg.scheme(s), cfg.threshold);
    std::printf("%-5s %s\n", std::string(scheme_name(s)).c_str(), report.all_satisfied() ? "ok" : "VIOLATED");
    for (const auto& chk : report.checks)
      std::printf("      %-22s %.4e %s\n", chk.name.c_str(), chk.ratio, chk.satisfied ? "" : "(>= threshold)");
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-noise calculator for differential atom interferometers with squeezed ensembles"};
  app.require_subcommand(1);

  Common common;
  std::string scheme = "ss";
  std::vector<std::string> scheme_list;
  std::optional<double> nbar_min, nbar_max;
  std::optional<int> points;
  bool no_bias = false;
  std::string out, svg;
  double area = 1e-4, rate = 7.292e-5, wavelength = 1e-6, mass = rb87::mass;

  auto* variance = app.add_subcommand("variance", "closed-form variance breakdown at one point");
  auto* sweep = app.add_subcommand("sweep", "N_bar sweep to CSV (and optionally SVG)");
  auto* mc = app.add_subcommand("mc", "Monte Carlo against closed form");
  auto* optimize = app.add_subcommand("optimize", "optimal probe detuning with decoherence");
  auto* sagnac = app.add_subcommand("sagnac", "atom versus light Sagnac phase");
  auto* check = app.add_subcommand("check", "validity conditions of the closed forms");

  for (auto* cmd : {variance, sweep, mc, optimize, check}) {
    add_common(cmd, common);
    cmd->add_option("--nbar", common.nbar, "mean atom number per ensemble");
  }
  for (auto* cmd : {variance, sweep}) {
    cmd->add_flag("--decoherence", common.decoherence, "include spontaneous-emission noise");
    cmd->add_flag("--optimize-delta", common.optimize_delta, "optimize the detuning per point");
  }
  variance->add_option("--scheme", scheme, "cs, ss, ss+, js, js+, js+c or ee");
  optimize->add_option("--scheme", scheme, "ss, ss+, js, js+, js+c or ee");
  for (auto* cmd : {sweep, mc, check})
    cmd->add_option("--scheme", scheme_list, "scheme names or 'all'")->delimiter(',');
  sweep->add_option("--nbar-min", nbar_min, "smallest N_bar");
  sweep->add_option("--nbar-max", nbar_max, "largest N_bar");
  sweep->add_option("--points", points, "log-spaced grid points");
  sweep->add_flag("--no-bias", no_bias, "leave the js+ theta bias out of its variance");
  sweep->add_option("--out", out, "CSV path ('-' for stdout)");
  sweep->add_option("--svg", svg, "SVG plot path");
  mc->add_option("--seed", common.seed, "random seed");
  mc->add_option("--samples", common.samples, "number of samples (>= 1000)");
  sagnac->add_option("--area", area, "enclosed area, m^2");
  sagnac->add_option("--rate", rate, "rotation rate, rad/s");
  sagnac->add_option("--wavelength", wavelength, "light wavelength, m");
  sagnac->add_option("--mass", mass, "atomic mass, kg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*variance) return cmd_variance(common, scheme);
    if (*sweep) return cmd_sweep(common, scheme_list, nbar_min, nbar_max, points, no_bias, out, svg);
    if (*mc) return cmd_mc(common, scheme_list);
    if (*optimize) return cmd_optimize(common, scheme);
    if (*sagnac) return cmd_sagnac(area, rate, wavelength, mass);
    if (*check) return cmd_check(common, scheme_list);
  } catch (const OptimizationFailed& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return numerical;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
  return usage;
}
