#pragma once

// Closed form against Monte Carlo. Agreement means the variance is within
// max(5% of the closed form, 4 se_variance) and the mean within 4 se_mean.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "diffint/mc_oracle.hpp"
#include "diffint/schemes.hpp"

namespace diffint {

struct McComparison {
  Scheme scheme = Scheme::cs;
  double closed_mean = 0.0;
  double closed_variance = 0.0;
  McResult mc;
  double z_mean = 0.0;
  double z_variance = 0.0;
  double variance_rel_error = 0.0;
  bool mean_agrees = false;
  bool variance_agrees = false;
  bool low_precision = false;  // sampling error above 20% of the closed form

  bool agrees() const { return mean_agrees && variance_agrees; }
};

inline constexpr double mc_variance_rel_tolerance = 0.05;
inline constexpr double mc_sigma_tolerance = 4.0;

inline McComparison compare_estimates(Scheme scheme, double closed_mean, double closed_variance, const McResult& mc) {
  McComparison r;
  r.scheme = scheme;
  r.closed_mean = closed_mean;
  r.closed_variance = closed_variance;
  r.mc = mc;
  const double dm = mc.sample_mean - closed_mean;
  const double dv = mc.sample_variance - closed_variance;
  r.z_mean = mc.se_mean > 0.0 ? dm / mc.se_mean : (dm == 0.0 ? 0.0 : INFINITY);
  r.z_variance = mc.se_variance > 0.0 ? dv / mc.se_variance : (dv == 0.0 ? 0.0 : INFINITY);
  r.variance_rel_error = dv / closed_variance;
  r.mean_agrees = std::abs(dm) <= mc_sigma_tolerance * mc.se_mean;
  r.variance_agrees =
      std::abs(dv) <= std::max(mc_variance_rel_tolerance * closed_variance, mc_sigma_tolerance * mc.se_variance);
  r.low_precision = mc.se_variance > 0.2 * closed_variance;
  return r;
}

/// `variance_scale` multiplies the closed-form variance before comparing;
/// values other than 1 exist to exercise the disagreement path.
inline McComparison compare_mc(const EnsembleConfig& cfg, const LightConfig& light, const SchemeId& scheme,
                               const McOptions& opts, double variance_scale = 1.0) {
  const PhaseEstimate closed = evaluate(scheme, cfg, light);
  const McResult mc = run_scheme_mc(cfg, light, scheme, opts);
  return compare_estimates(scheme.kind, closed.mean, variance_scale * closed.variance(), mc);
}

struct EntangledComparison {
  McComparison phi;
  McComparison theta;
  bool agrees() const { return phi.agrees() && theta.agrees(); }
};

inline EntangledComparison compare_ee_mc(const EnsembleConfig& cfg, const LightConfig& light, double tilt,
                                         const McOptions& opts) {
  const EntangledEstimates closed = eval_ee(cfg, light, tilt);
  const EntangledMc mc = run_ee_mc(cfg, light, tilt, opts);
  return {compare_estimates(Scheme::ee, closed.phi.mean, closed.phi.variance(), mc.phi),
          compare_estimates(Scheme::ee, closed.theta.mean, closed.theta.variance(), mc.theta)};
}

/// Ratio of two schemes' MC variances from runs sharing a seed. The interval
/// treats the runs as independent, which overstates it when they correlate.
struct VarianceRatio {
  double ratio = 0.0;
  double se = 0.0;
  McResult numerator;
  McResult denominator;
  bool contains(double value, double sigmas = 3.0) const { return std::abs(ratio - value) <= sigmas * se; }
};

inline VarianceRatio compare_ratio(const EnsembleConfig& cfg, const LightConfig& light, const SchemeId& numerator,
                                   const SchemeId& denominator, const McOptions& opts) {
  VarianceRatio r;
  r.numerator = run_scheme_mc(cfg, light, numerator, opts);
  r.denominator = run_scheme_mc(cfg, light, denominator, opts);
  const double a = r.numerator.sample_variance;
  const double b = r.denominator.sample_variance;
  r.ratio = a / b;
  r.se = r.ratio * std::hypot(r.numerator.se_variance / a, r.denominator.se_variance / b);
  return r;
}

inline std::string format_comparison(const McComparison& c, const std::string& label = {}) {
  char buf[768];
  std::snprintf(buf, sizeof buf,
                "%-6s closed mean %+.6e  mc mean %+.6e +- %.2e  z %+.2f  %s\n"
                "       closed var  %.6e  mc var  %.6e +- %.2e  z %+.2f  rel %+.3f  %s%s\n",
                label.empty() ? std::string(scheme_name(c.scheme)).c_str() : label.c_str(), c.closed_mean,
                c.mc.sample_mean, c.mc.se_mean, c.z_mean, c.mean_agrees ? "ok" : "DISAGREE", c.closed_variance,
                c.mc.sample_variance, c.mc.se_variance, c.z_variance, c.variance_rel_error,
                c.variance_agrees ? "ok" : "DISAGREE", c.low_precision ? "  (low precision)" : "");
  return buf;
}

}  // namespace diffint
