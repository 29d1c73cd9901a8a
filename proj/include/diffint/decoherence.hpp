#pragma once

// Photon-absorption decoherence during the QND pulses, and the detuning that
// balances light projection noise against it.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "diffint/core.hpp"
#include "diffint/golden_section.hpp"
#include "diffint/schemes.hpp"

namespace diffint {

/// kappa = N chi Gamma / Delta.
inline double optical_density(double atoms, double chi, double linewidth, double detuning) {
  if (detuning == 0.0) throw InvalidParameter("optical_density: detuning must be non-zero");
  return atoms * chi * linewidth / detuning;
}

struct DecoherenceParams {
  double photons = 0.0;
  double chi = 0.0;
  double linewidth = 0.0;
  double detuning = 0.0;

  /// Fraction of the atomic z projection surviving one pulse.
  double spin_damping() const { return 1.0 - photons * chi * linewidth / detuning; }
  /// Fraction of the Stokes z projection surviving one pass through `atoms`.
  double stokes_damping(double atoms) const { return 1.0 - optical_density(atoms, chi, linewidth, detuning); }
  double spin_added_variance(double atoms) const {
    return photons * atoms * chi * linewidth / (2.0 * detuning);
  }
  double stokes_added_variance(double atoms) const {
    return atoms * atoms * chi * linewidth / (4.0 * detuning);
  }
  bool in_valid_regime(double atoms) const {
    return std::abs(optical_density(atoms, chi, linewidth, detuning)) < 1.0;
  }
};

namespace detail {

template <MomentKind Kind>
GaussianMoments<Kind> damp_z(GaussianMoments<Kind> m, double factor, double added) {
  m.mean.z *= factor;
  for (int i = 0; i < 2; ++i) {
    m.cov(i, 2) *= factor;
    m.cov(2, i) *= factor;
  }
  m.cov(2, 2) = factor * factor * m.cov(2, 2) + added;
  return m;
}

}  // namespace detail

/// <J_z> -> (1 - n chi Gamma/Delta) <J_z>,
/// <J_z^2> -> (1 - n chi Gamma/Delta)^2 <J_z^2> + n N chi Gamma / (2 Delta).
inline SpinMoments decohere_spin_moments(const SpinMoments& m, double photons, double chi,
                                         double linewidth, double detuning) {
  if (detuning == 0.0) throw InvalidParameter("decohere_spin_moments: detuning must be non-zero");
  const DecoherenceParams p{photons, chi, linewidth, detuning};
  return detail::damp_z(m, p.spin_damping(), p.spin_added_variance(m.count));
}

inline StokesMoments decohere_stokes_moments(const StokesMoments& m, double atoms, double chi,
                                             double linewidth, double detuning) {
  if (detuning == 0.0) throw InvalidParameter("decohere_stokes_moments: detuning must be non-zero");
  const DecoherenceParams p{m.count, chi, linewidth, detuning};
  return detail::damp_z(m, p.stokes_damping(atoms), p.stokes_added_variance(atoms));
}

/// Added phase variance: passes * (n chi Gamma / (Delta Nbar) + 2 Gamma / (n^2 chi Delta)),
/// with passes the number of light pulses per ensemble (1 for SS).
inline double decoherence_variance(Scheme scheme, double nbar, const DecoherenceParams& p) {
  const int passes = light_passes(scheme);
  if (passes == 0 || p.linewidth == 0.0) return 0.0;
  if (p.detuning == 0.0) throw InvalidParameter("decoherence_variance: detuning must be non-zero");
  const double atom_side = p.photons * p.chi * p.linewidth / (p.detuning * nbar);
  const double light_side = 2.0 * p.linewidth / (p.photons * p.photons * p.chi * p.detuning);
  return passes * (atom_side + light_side);
}

inline PhaseEstimate corrected_variance(const PhaseEstimate& base, Scheme scheme,
                                        const DecoherenceParams& p, const EnsembleConfig& cfg) {
  PhaseEstimate out = base;
  out.breakdown.decoherence = decoherence_variance(scheme, cfg.mean_atoms(), p);
  return out;
}

/// Far-detuned optimum of the separately squeezed projection term plus
/// decoherence: (2 / (N^{3/2} d)) sqrt(2 eps0 hbar c A Gamma / omega).
inline double analytic_min_variance(double nbar, const PhysicalParams& p) {
  const auto& k = p.constants;
  return 2.0 / (std::pow(nbar, 1.5) * p.dipole) *
         std::sqrt(2.0 * k.epsilon0 * k.hbar * k.c * p.area * p.linewidth / p.omega);
}

struct DetuningSearch {
  double lower = 0.0;  // s^-1; 0 selects 1e-2 Gamma
  double upper = 0.0;  // s^-1; 0 selects 1e8 Gamma
  int points_per_decade = 20;
  bool include_alpha_gamma = true;
  bool include_decoherence = true;
  double delta_rel_tol = 1e-4;
  double variance_rel_tol = 1e-6;
};

struct DetuningOptimum {
  double detuning = 0.0;
  double chi = 0.0;
  double min_variance = 0.0;
  double analytic_min = 0.0;
  PhaseEstimate estimate;
};

/// Closed-form variance of `id` when the probe detuning is `detuning`.
inline PhaseEstimate estimate_at_detuning(const SchemeId& id, const EnsembleConfig& cfg,
                                          const PhysicalParams& params, double detuning,
                                          bool include_alpha_gamma, bool include_decoherence) {
  const double chi = compute_chi(params.g_eff(), params.linewidth, detuning);
  PhaseEstimate e = evaluate(id, cfg, LightConfig{params.photons, chi});
  if (!include_alpha_gamma) {
    e.breakdown.detection = 0.0;
    e.breakdown.mismatch = 0.0;
  }
  if (include_decoherence)
    e.breakdown.decoherence = decoherence_variance(
        id.kind, cfg.mean_atoms(), DecoherenceParams{params.photons, chi, params.linewidth, detuning});
  return e;
}

/// Log-grid scan of the detuning followed by golden-section refinement in
/// log(Delta).
inline DetuningOptimum optimize_detuning(const PhysicalParams& params, const EnsembleConfig& cfg,
                                         const SchemeId& id, const DetuningSearch& search = {}) {
  params.validate();
  const double lower = search.lower > 0.0 ? search.lower : 1e-2 * params.linewidth;
  const double upper = search.upper > 0.0 ? search.upper : 1e8 * params.linewidth;
  if (!(upper > lower) || std::log10(upper / lower) < 6.0)
    throw InvalidParameter("optimize_detuning: bracket must span at least six decades");
  if (id.kind == Scheme::cs) throw InvalidParameter("optimize_detuning: coherent scheme has no probe light");

  auto objective = [&](double log_delta) {
    return estimate_at_detuning(id, cfg, params, std::exp(log_delta), search.include_alpha_gamma,
                                search.include_decoherence)
        .variance();
  };

  const double lo = std::log(lower);
  const double hi = std::log(upper);
  const int points = std::max(3, static_cast<int>(std::ceil(std::log10(upper / lower) * search.points_per_decade)) + 1);
  std::vector<double> grid(points);
  std::size_t best = 0;
  double best_value = 0.0;
  for (int i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * i / (points - 1);
    const double v = objective(grid[i]);
    if (i == 0 || v < best_value) {
      best = i;
      best_value = v;
    }
  }
  if (best == 0 || best + 1 == grid.size())
    throw OptimizationFailed("optimize_detuning: minimum at bracket edge (Delta = " +
                             std::to_string(std::exp(grid[best])) + " s^-1); widen the search bracket");

  const auto refined = golden_section_minimize(objective, grid[best - 1], grid[best + 1],
                                               std::log1p(search.delta_rel_tol), search.variance_rel_tol);
  DetuningOptimum out;
  out.detuning = std::exp(refined.x);
  out.chi = compute_chi(params.g_eff(), params.linewidth, out.detuning);
  out.estimate = estimate_at_detuning(id, cfg, params, out.detuning, search.include_alpha_gamma,
                                      search.include_decoherence);
  out.min_variance = out.estimate.variance();
  out.analytic_min = analytic_min_variance(cfg.mean_atoms(), params);
  return out;
}

}  // namespace diffint
