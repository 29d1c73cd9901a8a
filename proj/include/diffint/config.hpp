#pragma once

// Flat `key = value` parameter files. Defaults are the close-to-ideal
// scenario; the `realistic` preset switches on decoherence, detuning
// optimization and the large detection and mismatch noise.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "diffint/core.hpp"
#include "diffint/decoherence.hpp"
#include "diffint/error.hpp"
#include "diffint/mc_oracle.hpp"
#include "diffint/schemes.hpp"

namespace diffint {

struct Config {
  PhysicalParams physical{};
  std::optional<double> chi;  // overrides the value computed from `physical`
  double nbar = 1e10;
  double gamma = 10.0;
  double alpha = 2e-7;
  double phi = 0.01;
  double theta = 0.01;
  double tilt = std::numbers::pi / 4.0;
  std::uint64_t seed = 1;
  std::uint64_t samples = 1'000'000;
  MismatchModel mismatch_model = MismatchModel::fixed_offset;
  bool exact_trig = true;
  double threshold = 0.1;
  bool decoherence = false;
  bool optimize_delta = false;

  double chi_used() const { return chi ? *chi : compute_chi(physical); }

  LightConfig light() const { return LightConfig{physical.photons, chi_used()}; }

  EnsembleConfig ensemble() const { return ensemble_at(nbar); }
  EnsembleConfig ensemble_at(double mean_atoms) const {
    return EnsembleConfig::from_mean(mean_atoms, gamma, alpha, phi, theta);
  }

  SchemeId scheme(Scheme kind) const { return kind == Scheme::ee ? SchemeId::entangled(tilt) : SchemeId{kind}; }

  McOptions mc_options() const {
    McOptions o;
    o.n_samples = samples;
    o.seed = seed;
    o.mismatch_model = mismatch_model;
    o.exact_trig = exact_trig;
    return o;
  }

  DecoherenceParams decoherence_params() const {
    return DecoherenceParams{physical.photons, chi_used(), physical.linewidth, physical.detuning};
  }
};

enum class Preset { ideal, realistic };

inline Config preset_config(Preset p) {
  Config c;
  if (p == Preset::realistic) {
    c.alpha = 2e-2;
    c.gamma = 1e4;
    c.decoherence = true;
    c.optimize_delta = true;
  }
  return c;
}

inline std::optional<Preset> parse_preset(std::string_view name) {
  if (name == "ideal") return Preset::ideal;
  if (name == "realistic") return Preset::realistic;
  return std::nullopt;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class LineContext {
public:
  LineContext(std::string source, int line) : source_(std::move(source)), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + what);
  }

  double real(const std::string& key, const std::string& text) const {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
      fail("'" + key + "' expects a finite number, got '" + text + "'");
    return v;
  }

  double positive(const std::string& key, const std::string& text) const {
    const double v = real(key, text);
    if (!(v > 0.0)) fail("'" + key + "' out of range: must be positive, got " + text);
    return v;
  }

  double non_negative(const std::string& key, const std::string& text) const {
    const double v = real(key, text);
    if (!(v >= 0.0)) fail("'" + key + "' out of range: must be non-negative, got " + text);
    return v;
  }

  std::uint64_t integer(const std::string& key, const std::string& text) const {
    const double v = real(key, text);
    if (v < 0.0 || v != std::floor(v) || v > 1.8e19) fail("'" + key + "' expects a non-negative integer, got " + text);
    return static_cast<std::uint64_t>(v);
  }

  bool boolean(const std::string& key, const std::string& text) const {
    if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "off" || text == "no") return false;
    fail("'" + key + "' expects true or false, got '" + text + "'");
  }

private:
  std::string source_;
  int line_;
};

}  // namespace detail

/// Keys accepted by parse_config, in documentation order.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "n", "chi", "gamma_linewidth", "detuning", "dipole", "omega", "area", "N_bar", "gamma_mismatch",
      "alpha", "phi", "theta", "varphi", "seed", "samples", "mismatch_model", "exact_trig", "threshold",
      "decoherence", "optimize_delta", "hbar", "epsilon0", "c", "planck"};
  return keys;
}

/// Applies the lines of `text` on top of `base`. Unknown or repeated keys,
/// malformed values and out-of-range values raise ConfigError naming
/// `source` and the line.
inline Config parse_config(std::string_view text, const Config& base = {}, const std::string& source = "<config>") {
  Config c = base;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const detail::LineContext ctx(source, line_no);
    const auto hash = raw.find('#');
    const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) ctx.fail("expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) ctx.fail("missing key before '='");
    if (value.empty()) ctx.fail("missing value for '" + key + "'");
    if (!seen.insert(key).second) ctx.fail("duplicate key '" + key + "'");

    auto& p = c.physical;
    if (key == "n") p.photons = ctx.positive(key, value);
    else if (key == "chi") {
      const double v = ctx.real(key, value);
      if (v == 0.0) ctx.fail("'chi' out of range: must be non-zero");
      c.chi = v;
    } else if (key == "gamma_linewidth") p.linewidth = ctx.positive(key, value);
    else if (key == "detuning") {
      const double v = ctx.real(key, value);
      if (v == 0.0) ctx.fail("'detuning' out of range: must be non-zero");
      p.detuning = v;
    } else if (key == "dipole") p.dipole = ctx.positive(key, value);
    else if (key == "omega") p.omega = ctx.positive(key, value);
    else if (key == "area") p.area = ctx.positive(key, value);
    else if (key == "N_bar") c.nbar = ctx.positive(key, value);
    else if (key == "gamma_mismatch") c.gamma = ctx.non_negative(key, value);
    else if (key == "alpha") c.alpha = ctx.non_negative(key, value);
    else if (key == "phi") c.phi = ctx.real(key, value);
    else if (key == "theta") c.theta = ctx.real(key, value);
    else if (key == "varphi") c.tilt = ctx.real(key, value);
    else if (key == "seed") c.seed = ctx.integer(key, value);
    else if (key == "samples") {
      c.samples = ctx.integer(key, value);
      if (c.samples < 1000) ctx.fail("'samples' out of range: at least 1000 required");
    } else if (key == "mismatch_model") {
      if (value == "fixed_offset") c.mismatch_model = MismatchModel::fixed_offset;
      else if (value == "gaussian_width") c.mismatch_model = MismatchModel::gaussian_width;
      else ctx.fail("'mismatch_model' must be fixed_offset or gaussian_width, got '" + value + "'");
    } else if (key == "exact_trig") c.exact_trig = ctx.boolean(key, value);
    else if (key == "threshold") c.threshold = ctx.positive(key, value);
    else if (key == "decoherence") c.decoherence = ctx.boolean(key, value);
    else if (key == "optimize_delta") c.optimize_delta = ctx.boolean(key, value);
    else if (key == "hbar") p.constants.hbar = ctx.positive(key, value);
    else if (key == "epsilon0") p.constants.epsilon0 = ctx.positive(key, value);
    else if (key == "c") p.constants.c = ctx.positive(key, value);
    else if (key == "planck") p.constants.planck = ctx.positive(key, value);
    else ctx.fail("unknown key '" + key + "'");
  }

  if (c.gamma * std::sqrt(c.nbar) >= 2.0 * c.nbar)
    throw ConfigError(source + ": gamma_mismatch too large for N_bar (an ensemble would be empty)");
  return c;
}

inline Config load_config(const std::string& path, const Config& base = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), base, path);
}

}  // namespace diffint
