#pragma once

// Leading-order means and variances of the differential-phase estimators.
//
//   CS    coherent input, fluorescence read-out
//   SS    separately squeezed ensembles
//   SS+   separately squeezed, QND read-out of each ensemble
//   JS    jointly squeezed (one pulse through both ensembles)
//   JS+   jointly squeezed, joint QND read-out
//   JS+C  JS+ with the theta-induced offset subtracted
//   EE    entangled ensembles, tilted phase plane; yields phi and theta

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "diffint/core.hpp"

namespace diffint {

enum class Scheme { cs, ss, ss_plus, js, js_plus, js_plus_corrected, ee };

struct SchemeId {
  Scheme kind = Scheme::cs;
  double tilt = std::numbers::pi / 4.0;  // EE only

  static SchemeId entangled(double tilt) { return {Scheme::ee, tilt}; }
  bool operator==(const SchemeId&) const = default;
};

inline constexpr std::array<Scheme, 7> all_schemes = {
    Scheme::cs, Scheme::ss, Scheme::ss_plus, Scheme::js,
    Scheme::js_plus, Scheme::js_plus_corrected, Scheme::ee};

inline std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::cs: return "cs";
    case Scheme::ss: return "ss";
    case Scheme::ss_plus: return "ss+";
    case Scheme::js: return "js";
    case Scheme::js_plus: return "js+";
    case Scheme::js_plus_corrected: return "js+c";
    case Scheme::ee: return "ee";
  }
  return "?";
}

inline std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : all_schemes)
    if (scheme_name(s) == name) return s;
  return std::nullopt;
}

/// Number of light pulses crossing each ensemble; sets the decoherence weight.
inline int light_passes(Scheme s) {
  switch (s) {
    case Scheme::cs: return 0;
    case Scheme::ss: return 1;
    case Scheme::ss_plus: return 2;
    case Scheme::js: return 1;
    case Scheme::js_plus: return 2;
    case Scheme::js_plus_corrected: return 2;
    case Scheme::ee: return 4;
  }
  return 0;
}

/// Probe light shared by both ensembles: same photon number and coupling.
struct LightConfig {
  double photons = reference_point::photons;
  double chi = reference_point::chi;

  double squeezing_strength() const { return photons * chi * chi; }
  void validate() const {
    if (!(photons > 0.0)) throw InvalidParameter("photon number must be positive");
    if (!std::isfinite(chi)) throw InvalidParameter("chi must be finite");
  }
};

struct VarianceBreakdown {
  double projection = 0.0;
  double detection = 0.0;    // alpha terms
  double mismatch = 0.0;     // gamma terms
  double decoherence = 0.0;

  double total() const { return projection + detection + mismatch + decoherence; }
};

struct PhaseEstimate {
  double mean = 0.0;
  VarianceBreakdown breakdown;
  std::vector<std::pair<std::string, double>> bias_terms;

  double variance() const { return breakdown.total(); }

  double bias(std::string_view label) const {
    for (const auto& [name, value] : bias_terms)
      if (name == label) return value;
    return 0.0;
  }
};

namespace detail {

inline void require_coupling(const LightConfig& light, const char* who) {
  light.validate();
  if (light.chi == 0.0) throw InvalidParameter(std::string(who) + ": chi must be non-zero");
}

inline double inv_sum(const EnsembleConfig& c) { return 1.0 / c.atoms_j + 1.0 / c.atoms_l; }
inline double inv_sq_sum(const EnsembleConfig& c) {
  return 1.0 / (c.atoms_j * c.atoms_j) + 1.0 / (c.atoms_l * c.atoms_l);
}
inline double imbalance(const EnsembleConfig& c) {
  return (c.atoms_l - c.atoms_j) / (c.atoms_l + c.atoms_j);
}

}  // namespace detail

inline PhaseEstimate eval_cs(const EnsembleConfig& cfg) {
  cfg.validate();
  const double shift = -cfg.alpha * detail::inv_sum(cfg);
  PhaseEstimate e;
  e.mean = cfg.phi + shift;
  e.breakdown.projection = 0.25 / cfg.atoms_j + 0.25 / cfg.atoms_l;
  e.breakdown.detection = cfg.alpha * detail::inv_sum(cfg);
  e.bias_terms = {{"detection", shift}};
  return e;
}

inline PhaseEstimate eval_ss(const EnsembleConfig& cfg, const LightConfig& light) {
  cfg.validate();
  detail::require_coupling(light, "eval_ss");
  const double shift = -cfg.alpha * detail::inv_sum(cfg);
  PhaseEstimate e;
  e.mean = cfg.phi + shift;
  e.breakdown.projection = detail::inv_sq_sum(cfg) / light.squeezing_strength();
  e.breakdown.detection = cfg.alpha * detail::inv_sum(cfg);
  e.bias_terms = {{"detection", shift}};
  return e;
}

inline PhaseEstimate eval_ss_plus(const EnsembleConfig& cfg, const LightConfig& light) {
  cfg.validate();
  detail::require_coupling(light, "eval_ss_plus");
  const double phase_sq = cfg.theta * cfg.theta + cfg.phi * cfg.phi;
  const double shift = cfg.alpha * cfg.theta * detail::inv_sum(cfg);
  PhaseEstimate e;
  e.mean = cfg.phi + shift;
  e.breakdown.projection = 2.0 * detail::inv_sq_sum(cfg) / light.squeezing_strength();
  e.breakdown.detection = cfg.alpha * phase_sq * 0.25 * detail::inv_sum(cfg);
  e.bias_terms = {{"detection", shift}};
  return e;
}

inline PhaseEstimate eval_js(const EnsembleConfig& cfg, const LightConfig& light) {
  cfg.validate();
  detail::require_coupling(light, "eval_js");
  const double nbar = cfg.mean_atoms();
  const double shift = -2.0 * cfg.alpha / nbar;
  PhaseEstimate e;
  e.mean = cfg.phi + shift;
  e.breakdown.projection = 1.0 / (light.squeezing_strength() * nbar * nbar);
  e.breakdown.detection = 2.0 * cfg.alpha / nbar;
  e.breakdown.mismatch = cfg.gamma * cfg.gamma / (8.0 * nbar * nbar);
  e.bias_terms = {{"detection", shift}};
  return e;
}

/// The theta offset (N_L - N_J)/(N_L + N_J) theta is reported as the bias
/// term "theta-mismatch" and left out of the variance.
inline PhaseEstimate eval_js_plus(const EnsembleConfig& cfg, const LightConfig& light) {
  cfg.validate();
  detail::require_coupling(light, "eval_js_plus");
  const double nbar = cfg.mean_atoms();
  const double phase_sq = cfg.theta * cfg.theta + cfg.phi * cfg.phi;
  const double theta_bias = detail::imbalance(cfg) * cfg.theta;
  const double detection_bias = cfg.alpha * cfg.phi / (2.0 * nbar);
  PhaseEstimate e;
  e.mean = cfg.phi + theta_bias + detection_bias;
  e.breakdown.projection = 2.0 / (light.squeezing_strength() * nbar * nbar);
  e.breakdown.detection = cfg.alpha / (2.0 * nbar) * phase_sq;
  e.breakdown.mismatch = cfg.gamma * cfg.gamma / (8.0 * nbar * nbar) * cfg.alpha * phase_sq;
  e.bias_terms = {{"theta-mismatch", theta_bias}, {"detection", detection_bias}};
  return e;
}

inline PhaseEstimate eval_js_plus_corrected(const EnsembleConfig& cfg, const LightConfig& light) {
  cfg.validate();
  detail::require_coupling(light, "eval_js_plus_corrected");
  const double nbar = cfg.mean_atoms();
  const double detection_bias = cfg.alpha * cfg.phi / (2.0 * nbar);
  const double mismatch_bias = -cfg.gamma * cfg.gamma * cfg.alpha / (2.0 * nbar * nbar);
  PhaseEstimate e;
  e.mean = cfg.phi + detection_bias + mismatch_bias;
  e.breakdown.projection = 2.0 / (light.squeezing_strength() * nbar * nbar);
  e.breakdown.detection = cfg.alpha * cfg.phi * cfg.phi / (2.0 * nbar);
  e.breakdown.mismatch = cfg.gamma * cfg.gamma / (8.0 * nbar * nbar);
  e.bias_terms = {{"detection", detection_bias}, {"mismatch", mismatch_bias}};
  return e;
}

struct EntangledEstimates {
  PhaseEstimate phi;
  PhaseEstimate theta;
};

/// Entangled ensembles with tilt `tilt`. Variances are the leading terms at
/// theta = phi = 0. A tilt of 0 or pi/2 leaves one estimator undefined.
inline EntangledEstimates eval_ee(const EnsembleConfig& cfg, const LightConfig& light, double tilt) {
  cfg.validate();
  detail::require_coupling(light, "eval_ee");
  const double c = std::cos(tilt);
  const double s = std::sin(tilt);
  if (std::abs(c) < 1e-12 || std::abs(s) < 1e-12)
    throw DegenerateTilt("eval_ee: tilt must avoid multiples of pi/2");
  const double nbar = cfg.mean_atoms();
  const double nchi2 = light.squeezing_strength();
  const double base = 2.0 / (nbar * nbar * nchi2);
  const double mismatch = cfg.gamma * cfg.gamma * nchi2 / (8.0 * nbar);
  const double imb = detail::imbalance(cfg);

  EntangledEstimates out;
  auto fill = [&](PhaseEstimate& e, double target, double other, double trig) {
    const double cross = imb * other;
    const double det = cfg.alpha * target / (2.0 * nbar);
    e.mean = target + cross + det;
    e.breakdown.projection = base / (trig * trig);
    e.breakdown.mismatch = mismatch;
    e.bias_terms = {{"cross-mismatch", cross}, {"detection", det}};
  };
  fill(out.phi, cfg.phi, cfg.theta, c);
  fill(out.theta, cfg.theta, cfg.phi, s);
  return out;
}

/// Closed form for any scheme; EE yields its phi estimator.
inline PhaseEstimate evaluate(const SchemeId& id, const EnsembleConfig& cfg, const LightConfig& light) {
  switch (id.kind) {
    case Scheme::cs: return eval_cs(cfg);
    case Scheme::ss: return eval_ss(cfg, light);
    case Scheme::ss_plus: return eval_ss_plus(cfg, light);
    case Scheme::js: return eval_js(cfg, light);
    case Scheme::js_plus: return eval_js_plus(cfg, light);
    case Scheme::js_plus_corrected: return eval_js_plus_corrected(cfg, light);
    case Scheme::ee: return eval_ee(cfg, light, id.tilt).phi;
  }
  throw InvalidParameter("evaluate: unknown scheme");
}

struct AssumptionCheck {
  std::string name;
  double ratio = 0.0;
  bool satisfied = true;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  double threshold = 0.1;

  bool all_satisfied() const {
    for (const auto& c : checks)
      if (!c.satisfied) return false;
    return true;
  }
  const AssumptionCheck* find(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Evaluates the dimensionless "<< 1" conditions behind each scheme's
/// leading-order expressions; satisfied means ratio < threshold.
inline AssumptionReport check_assumptions(const EnsembleConfig& cfg, const LightConfig& light,
                                          const SchemeId& id, double threshold = 0.1) {
  AssumptionReport report;
  report.threshold = threshold;
  if (id.kind == Scheme::cs) return report;

  const double nbar = cfg.mean_atoms();
  const double chi2 = light.chi * light.chi;
  const double nchi2 = light.photons * chi2;
  const double phase_sq = cfg.theta * cfg.theta + cfg.phi * cfg.phi;
  const double g2 = cfg.gamma * cfg.gamma;

  auto add = [&](std::string name, double ratio) {
    report.checks.push_back({std::move(name), ratio, ratio < threshold});
  };
  add("nbar_chi2", nbar * chi2);
  add("squeezing_phase", nchi2 * std::sqrt(nbar) * phase_sq / std::sqrt(8.0));

  switch (id.kind) {
    case Scheme::js:
    case Scheme::js_plus:
    case Scheme::js_plus_corrected:
      add("joint_mismatch_phase", cfg.gamma * std::sqrt(nbar) * nchi2 * nchi2 * phase_sq);
      add("joint_mismatch", nchi2 * g2 / 8.0);
      if (id.kind == Scheme::js_plus) add("theta_bias", g2 * nbar * nchi2 * cfg.theta * cfg.theta / 8.0);
      break;
    case Scheme::ee:
      // mismatch term over the untilted projection term
      add("ee_commutator", g2 * nbar * nchi2 * nchi2 / 16.0);
      // relative excess of the exact (trigonometric) dynamics over the
      // leading-order variance; measured at about Nbar (n chi^2)^3 / 38 for phi
      add("ee_higher_order", nbar * nchi2 * nchi2 * nchi2 / 32.0);
      break;
    default:
      break;
  }
  return report;
}

}  // namespace diffint
