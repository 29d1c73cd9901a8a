#pragma once

// Monte Carlo check of the closed forms. Each sample draws Gaussian
// surrogates of the coherent spins, Stokes vectors, atom numbers and
// detection noise, pushes them through the exact rotation and QND maps of a
// scheme's pulse sequence and evaluates that scheme's phase estimator.
//
// Samples are independent streams keyed by (seed, sample index) and reduced
// block by block in index order, so results do not depend on thread count.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "diffint/core.hpp"
#include "diffint/schemes.hpp"

namespace diffint {

/// splitmix64 stream positioned by (seed, index). Satisfies
/// UniformRandomBitGenerator.
class SampleStream {
public:
  using result_type = std::uint64_t;

  SampleStream(std::uint64_t seed, std::uint64_t index)
      : state_(mix(seed ^ mix(index + 0x632BE59BD9B4E019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

enum class MismatchModel {
  fixed_offset,   // |N_J - N_L| = gamma sqrt(Nbar), sign alternating with sample index
  gaussian_width  // N_J, N_L independent, E|N_J - N_L| = gamma sqrt(Nbar)
};

struct McOptions {
  std::uint64_t n_samples = 1'000'000;
  std::uint64_t seed = 1;
  MismatchModel mismatch_model = MismatchModel::fixed_offset;
  bool exact_trig = true;
  unsigned threads = 0;  // 0: hardware concurrency
  bool ee_second_pulse = true;

  void validate() const {
    if (n_samples < 1000) throw ConfigError("Monte Carlo needs at least 1000 samples");
  }
};

struct McResult {
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// One draw. Spins are in the frame after the first beam splitter, mean
/// (N/2) x^. S, T are the squeezing pulses (T is the second ensemble's pulse
/// or, for EE, the second joint pulse); s_read, t_read the read-out pulses.
struct MicroState {
  Vec3 j, l;
  Vec3 s, t, s_read, t_read;
  double atoms_j = 0.0;
  double atoms_l = 0.0;
  // Fluorescence errors per level: measured N = N + d1 + d2, measured
  // J_z = J_z + (d1 - d2)/2.
  std::array<double, 2> dn_j{};
  std::array<double, 2> dn_l{};

  double measured_atoms_j() const { return atoms_j + dn_j[0] + dn_j[1]; }
  double measured_atoms_l() const { return atoms_l + dn_l[0] + dn_l[1]; }
  double measured_jz(const Vec3& v) const { return v.z + 0.5 * (dn_j[0] - dn_j[1]); }
  double measured_lz(const Vec3& v) const { return v.z + 0.5 * (dn_l[0] - dn_l[1]); }
};

/// Draw sample `index`. The number of variates consumed does not depend on
/// alpha or gamma, so runs that differ only in those share random numbers.
inline MicroState sample_initial(const EnsembleConfig& cfg, const LightConfig& light, const McOptions& opts,
                                 std::uint64_t index) {
  const double nbar = cfg.mean_atoms();
  if (!(nbar > 0.0) || !(light.photons > 0.0))
    throw InvalidParameter("sample_initial: atom and photon numbers must be positive");

  SampleStream rng(opts.seed, index);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::array<double, 18> z;
  for (double& v : z) v = gauss(rng);

  MicroState m;
  const double gap = cfg.gamma * std::sqrt(nbar);
  if (opts.mismatch_model == MismatchModel::fixed_offset) {
    const double sign = (index % 2 == 0) ? 1.0 : -1.0;
    m.atoms_j = nbar + 0.5 * sign * gap;
    m.atoms_l = nbar - 0.5 * sign * gap;
  } else {
    const double width = 0.5 * gap * std::sqrt(std::numbers::pi);
    m.atoms_j = nbar + width * z[16];
    m.atoms_l = nbar + width * z[17];
  }
  if (!(m.atoms_j > 0.0) || !(m.atoms_l > 0.0)) throw InvalidParameter("sample_initial: sampled atom number not positive");

  auto spin = [](double atoms, double a, double b) {
    const double sd = std::sqrt(atoms / 4.0);
    return Vec3{atoms / 2.0, sd * a, sd * b};
  };
  const double n = light.photons;
  const double light_sd = std::sqrt(n / 4.0);
  auto stokes = [&](double a, double b) { return Vec3{n / 2.0, light_sd * a, light_sd * b}; };

  m.j = spin(m.atoms_j, z[0], z[1]);
  m.l = spin(m.atoms_l, z[2], z[3]);
  m.s = stokes(z[4], z[5]);
  m.t = stokes(z[6], z[7]);
  m.s_read = stokes(z[8], z[9]);
  m.t_read = stokes(z[10], z[11]);

  // Atom-number error and population-imbalance error, each of variance
  // alpha N, split onto the two levels.
  auto levels = [&](double atoms, double a, double b) {
    const double sd = std::sqrt(cfg.alpha * atoms);
    const double number = sd * a;
    const double imbalance = sd * b;
    return std::array<double, 2>{0.5 * number + imbalance, 0.5 * number - imbalance};
  };
  m.dn_j = levels(m.atoms_j, z[12], z[13]);
  m.dn_l = levels(m.atoms_l, z[14], z[15]);
  return m;
}

namespace detail {

// Linearized form keeps x fixed: y picks up angle * x only.
inline Vec3 rotate_z(const Vec3& v, double angle, bool exact) {
  if (!exact) return {v.x, v.y + angle * v.x, v.z};
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

}  // namespace detail

struct QndOutput {
  Vec3 spin;
  Vec3 stokes;
};

/// Dispersive interaction: the spin turns about z by chi S_z, the Stokes
/// vector by chi J_z. Both z components pass unchanged.
inline QndOutput qnd_transform(const Vec3& spin, const Vec3& stokes, double chi, bool exact = true) {
  return {detail::rotate_z(spin, chi * stokes.z, exact), detail::rotate_z(stokes, chi * spin.z, exact)};
}

struct JointQndOutput {
  Vec3 j;
  Vec3 l;
  Vec3 stokes;
};

/// One pulse through J then L.
inline JointQndOutput joint_qnd_transform(const Vec3& j, const Vec3& l, const Vec3& stokes, double chi,
                                          bool exact = true) {
  const auto first = qnd_transform(j, stokes, chi, exact);
  const auto second = qnd_transform(l, first.stokes, chi, exact);
  return {first.spin, second.spin, second.stokes};
}

namespace detail {

/// Fixed rotations of a run, built once.
struct PulsePlan {
  Rotation squeeze_turn;    // R_x(pi/2)
  Rotation unturn;          // R_x(-pi/2)
  Rotation readout_j;       // R_x(-pi/2) R_z(Phi_J)
  Rotation readout_l;
  Rotation squeezed_j;      // R_x(-pi/2) R_z(Phi_J) R_x(pi/2)
  Rotation squeezed_l;
  Rotation joint_l;         // R_x(pi/2) R_z(Phi_L) R_x(-pi/2): phase sense reversed by the extra pi pulse
  Rotation tilted_j;        // R_x(-tilt) R_z(Phi_J) R_x(tilt)
  Rotation tilted_l;
  double cos_tilt = 1.0;
  double sin_tilt = 0.0;

  PulsePlan(const EnsembleConfig& cfg, double tilt) {
    const double half_pi = std::numbers::pi / 2.0;
    squeeze_turn = Rotation::about_axis(Axis::x, half_pi);
    unturn = Rotation::about_axis(Axis::x, -half_pi);
    readout_j = interferometer_rotation(cfg.phase_j());
    readout_l = interferometer_rotation(cfg.phase_l());
    squeezed_j = readout_j * squeeze_turn;
    squeezed_l = readout_l * squeeze_turn;
    joint_l = squeeze_turn * Rotation::about_axis(Axis::z, cfg.phase_l()) * unturn;
    const Rotation tilt_in = Rotation::about_axis(Axis::x, tilt);
    const Rotation tilt_out = Rotation::about_axis(Axis::x, -tilt);
    tilted_j = tilt_out * Rotation::about_axis(Axis::z, cfg.phase_j()) * tilt_in;
    tilted_l = tilt_out * Rotation::about_axis(Axis::z, cfg.phase_l()) * tilt_in;
    cos_tilt = std::cos(tilt);
    sin_tilt = std::sin(tilt);
  }
};

/// Estimator values for one sample; EE fills both channels (phi, theta).
inline std::array<double, 2> evaluate_sample(Scheme scheme, const PulsePlan& plan, const LightConfig& light,
                                             const McOptions& opts, const MicroState& m) {
  const double chi = light.chi;
  const double gain = 2.0 / (light.photons * chi);  // converts S_y to J_z units
  const bool exact = opts.exact_trig;
  const double nj = m.measured_atoms_j();
  const double nl = m.measured_atoms_l();
  const double nbar = 0.5 * (nj + nl);

  switch (scheme) {
    case Scheme::cs: {
      const Vec3 j = plan.readout_j * m.j;
      const Vec3 l = plan.readout_l * m.l;
      return {-m.measured_jz(j) / nj + m.measured_lz(l) / nl, 0.0};
    }
    case Scheme::ss:
    case Scheme::ss_plus: {
      const auto qj = qnd_transform(m.j, m.s, chi, exact);
      const auto ql = qnd_transform(m.l, m.t, chi, exact);
      const Vec3 j = plan.squeezed_j * qj.spin;
      const Vec3 l = plan.squeezed_l * ql.spin;
      if (scheme == Scheme::ss)
        return {-(m.measured_jz(j) - gain * qj.stokes.y) / nj + (m.measured_lz(l) - gain * ql.stokes.y) / nl, 0.0};
      const auto rj = qnd_transform(j, m.s_read, chi, exact);
      const auto rl = qnd_transform(l, m.t_read, chi, exact);
      return {-gain * (rj.stokes.y - qj.stokes.y) / nj + gain * (rl.stokes.y - ql.stokes.y) / nl, 0.0};
    }
    case Scheme::js:
    case Scheme::js_plus:
    case Scheme::js_plus_corrected: {
      const auto q = joint_qnd_transform(m.j, m.l, m.s, chi, exact);
      const Vec3 j = plan.squeezed_j * q.j;
      const Vec3 l = plan.joint_l * q.l;
      if (scheme == Scheme::js)
        return {-(m.measured_jz(j) / nj + m.measured_lz(l) / nl - gain * q.stokes.y / nbar), 0.0};
      const auto r = joint_qnd_transform(j, l, m.s_read, chi, exact);
      const double joint = -gain * (r.stokes.y - q.stokes.y) / nbar;
      if (scheme == Scheme::js_plus) return {joint, 0.0};
      const double theta_hat = -m.measured_jz(r.j) / nj + m.measured_lz(r.l) / nl;
      return {joint - (nj - nl) / (nj + nl) * theta_hat, 0.0};
    }
    case Scheme::ee: {
      // Squeeze J_z + L_z, turn J_y -> J_z and -L_y -> L_z, squeeze again.
      const auto first = joint_qnd_transform(m.j, m.l, m.s, chi, exact);
      Vec3 j = plan.squeeze_turn * first.j;
      Vec3 l = plan.unturn * first.l;
      Vec3 t_out = m.t;
      if (opts.ee_second_pulse) {
        const auto second = joint_qnd_transform(j, l, m.t, chi, exact);
        j = second.j;
        l = second.l;
        t_out = second.stokes;
      }
      j = plan.tilted_j * j;
      l = plan.tilted_l * l;
      // Back to the frame of the first pulse; read the sum of z components.
      j = plan.unturn * j;
      l = plan.squeeze_turn * l;
      const auto read_s = joint_qnd_transform(j, l, m.s_read, chi, exact);
      // And in the frame of the second pulse.
      j = plan.squeeze_turn * read_s.j;
      l = plan.unturn * read_s.l;
      const auto read_t = joint_qnd_transform(j, l, m.t_read, chi, exact);
      const double phi = -gain * (read_s.stokes.y - first.stokes.y) / (nbar * plan.cos_tilt);
      const double theta = -gain * (read_t.stokes.y - t_out.y) / (nbar * plan.sin_tilt);
      return {phi, theta};
    }
  }
  return {0.0, 0.0};
}

/// Central moments up to fourth order, mergeable in a fixed order.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;

  static Moments of(const double* values, std::size_t count) {
    Moments r;
    r.n = static_cast<double>(count);
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += values[i];
    r.mean = sum / r.n;
    for (std::size_t i = 0; i < count; ++i) {
      const double d = values[i] - r.mean;
      const double d2 = d * d;
      r.m2 += d2;
      r.m3 += d2 * d;
      r.m4 += d2 * d2;
    }
    return r;
  }

  void merge(const Moments& b) {
    if (b.n == 0.0) return;
    if (n == 0.0) {
      *this = b;
      return;
    }
    const double na = n, nb = b.n, nt = na + nb;
    const double d = b.mean - mean;
    const double d2 = d * d;
    const double m4_new = m4 + b.m4 + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (nt * nt * nt) +
                          6.0 * d2 * (na * na * b.m2 + nb * nb * m2) / (nt * nt) +
                          4.0 * d * (na * b.m3 - nb * m3) / nt;
    const double m3_new = m3 + b.m3 + d2 * d * na * nb * (na - nb) / (nt * nt) + 3.0 * d * (na * b.m2 - nb * m2) / nt;
    m2 += b.m2 + d2 * na * nb / nt;
    m3 = m3_new;
    m4 = m4_new;
    mean += d * nb / nt;
    n = nt;
  }

  McResult result(std::uint64_t seed) const {
    McResult r;
    r.n_samples = static_cast<std::uint64_t>(n);
    r.seed = seed;
    r.sample_mean = mean;
    r.sample_variance = m2 / (n - 1.0);
    r.se_mean = std::sqrt(r.sample_variance / n);
    const double mu4 = m4 / n;
    const double s2 = r.sample_variance;
    r.se_variance = std::sqrt(std::max(0.0, (mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n));
    return r;
  }
};

inline constexpr std::size_t mc_block_size = 4096;

inline std::array<McResult, 2> run_channels(Scheme scheme, double tilt, const EnsembleConfig& cfg,
                                            const LightConfig& light, const McOptions& opts) {
  opts.validate();
  cfg.validate();
  light.validate();
  if (scheme != Scheme::cs && light.chi == 0.0) throw InvalidParameter("Monte Carlo: chi must be non-zero");
  if (scheme == Scheme::ee && (std::abs(std::cos(tilt)) < 1e-12 || std::abs(std::sin(tilt)) < 1e-12))
    throw DegenerateTilt("Monte Carlo: tilt must avoid multiples of pi/2");

  const PulsePlan plan(cfg, tilt);
  const std::uint64_t total = opts.n_samples;
  const std::size_t blocks = static_cast<std::size_t>((total + mc_block_size - 1) / mc_block_size);
  std::vector<std::array<Moments, 2>> partial(blocks);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    std::vector<double> phi(mc_block_size), theta(mc_block_size);
    for (std::size_t b = next++; b < blocks; b = next++) {
      const std::uint64_t begin = b * mc_block_size;
      const std::uint64_t end = std::min<std::uint64_t>(total, begin + mc_block_size);
      const std::size_t count = static_cast<std::size_t>(end - begin);
      for (std::size_t i = 0; i < count; ++i) {
        const MicroState m = sample_initial(cfg, light, opts, begin + i);
        const auto v = evaluate_sample(scheme, plan, light, opts, m);
        phi[i] = v[0];
        theta[i] = v[1];
      }
      partial[b] = {Moments::of(phi.data(), count), Moments::of(theta.data(), count)};
    }
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::array<Moments, 2> acc;
  for (const auto& p : partial) {
    acc[0].merge(p[0]);
    acc[1].merge(p[1]);
  }
  return {acc[0].result(opts.seed), acc[1].result(opts.seed)};
}

}  // namespace detail

/// Sample statistics of the scheme's estimator (phi estimator for EE).
inline McResult run_scheme_mc(const EnsembleConfig& cfg, const LightConfig& light, const SchemeId& scheme,
                              const McOptions& opts = {}) {
  return detail::run_channels(scheme.kind, scheme.tilt, cfg, light, opts)[0];
}

struct EntangledMc {
  McResult phi;
  McResult theta;
};

inline EntangledMc run_ee_mc(const EnsembleConfig& cfg, const LightConfig& light, double tilt,
                             const McOptions& opts = {}) {
  const auto r = detail::run_channels(Scheme::ee, tilt, cfg, light, opts);
  return {r[0], r[1]};
}

}  // namespace diffint
