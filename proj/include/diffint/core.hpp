#pragma once

// Value types and exact transforms shared by the closed-form schemes, the
// Monte Carlo oracle and the decoherence model.
//
// Spin and Stokes vectors are collective quantities in units of atoms/2
// (photons/2). Counts are real numbers: everything here is a Gaussian
// surrogate valid for N, n >> 1.

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "diffint/error.hpp"

namespace diffint {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr bool operator==(const Vec3&) const = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  static constexpr Mat3 identity() {
    Mat3 r;
    r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
    return r;
  }
  static constexpr Mat3 diagonal(double a, double b, double c) {
    Mat3 r;
    r.m[0][0] = a;
    r.m[1][1] = b;
    r.m[2][2] = c;
    return r;
  }

  constexpr double operator()(int i, int j) const { return m[i][j]; }
  constexpr double& operator()(int i, int j) { return m[i][j]; }

  constexpr Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
    return r;
  }
  constexpr Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }
  constexpr Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }
  constexpr double trace() const { return m[0][0] + m[1][1] + m[2][2]; }
  constexpr double determinant() const {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
};

enum class Axis { x, y, z };

/// Proper rotation (orthogonal, det +1). Right-handed active convention:
/// about_axis(z, a) maps x^ to cos(a) x^ + sin(a) y^.
class Rotation {
public:
  Rotation() : matrix_(Mat3::identity()) {}

  static Rotation about_axis(Axis axis, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat3 r = Mat3::identity();
    switch (axis) {
      case Axis::x:
        r(1, 1) = c; r(1, 2) = -s;
        r(2, 1) = s; r(2, 2) = c;
        break;
      case Axis::y:
        r(0, 0) = c; r(0, 2) = s;
        r(2, 0) = -s; r(2, 2) = c;
        break;
      case Axis::z:
        r(0, 0) = c; r(0, 1) = -s;
        r(1, 0) = s; r(1, 1) = c;
        break;
    }
    return Rotation(r);
  }

  /// Composition: (a * b) applies b first, then a.
  Rotation operator*(const Rotation& o) const { return Rotation(matrix_ * o.matrix_); }
  Vec3 operator*(const Vec3& v) const { return matrix_ * v; }

  const Mat3& matrix() const { return matrix_; }
  Rotation inverse() const { return Rotation(matrix_.transposed()); }

private:
  explicit Rotation(const Mat3& m) : matrix_(m) {}
  Mat3 matrix_;
};

inline Rotation rotation_about_axis(Axis axis, double angle) {
  return Rotation::about_axis(axis, angle);
}

enum class MomentKind { spin, stokes };

/// First and second moments of a collective spin (atoms) or Stokes vector
/// (light). `count` is the number of atoms or photons.
template <MomentKind Kind>
struct GaussianMoments {
  Vec3 mean;
  Mat3 cov;
  double count = 0.0;
};

using SpinMoments = GaussianMoments<MomentKind::spin>;
using StokesMoments = GaussianMoments<MomentKind::stokes>;

/// Heisenberg-picture update: mean -> R mean, cov -> R cov R^T.
template <MomentKind Kind>
GaussianMoments<Kind> apply_rotation(const Rotation& r, const GaussianMoments<Kind>& in) {
  GaussianMoments<Kind> out;
  out.mean = r * in.mean;
  out.cov = r.matrix() * in.cov * r.matrix().transposed();
  out.count = in.count;
  return out;
}

/// All atoms in |1>: mean (0, 0, N/2), variances (N/4, N/4, 0).
inline SpinMoments coherent_spin_state(double atoms) {
  if (!(atoms > 0.0)) throw InvalidParameter("coherent_spin_state: atom number must be positive");
  return {{0.0, 0.0, atoms / 2.0}, Mat3::diagonal(atoms / 4.0, atoms / 4.0, 0.0), atoms};
}

/// Linearly polarized pulse: mean (n/2, 0, 0), variances (0, n/4, n/4).
inline StokesMoments coherent_stokes_state(double photons) {
  if (!(photons > 0.0)) throw InvalidParameter("coherent_stokes_state: photon number must be positive");
  return {{photons / 2.0, 0.0, 0.0}, Mat3::diagonal(0.0, photons / 4.0, photons / 4.0), photons};
}

/// CODATA 2018 values; kept in a struct so tests can pin alternatives.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;     // J s
  double planck = 6.62607015e-34;    // J s
  double epsilon0 = 8.8541878128e-12;  // F/m
  double c = 299792458.0;            // m/s
};

namespace rb87 {
inline constexpr double linewidth = 3.8e7;        // s^-1, D2 line
inline constexpr double omega = 2.414e15;         // s^-1
inline constexpr double mass = 1.443160648e-25;   // kg
}  // namespace rb87

/// Reference operating point used to fix the default dipole moment: the
/// coupling 3.23e-10 at detuning 2.28e10 s^-1 with a 0.3 mm^2 beam.
namespace reference_point {
inline constexpr double chi = 3.23e-10;
inline constexpr double detuning = 2.28e10;
inline constexpr double area = 0.3e-6;
inline constexpr double photons = 1e11;
}  // namespace reference_point

/// Single-pass coupling with the sample length cancelled:
/// g^2 L / c = omega d^2 / (2 hbar eps0 A c).
inline double effective_coupling(double dipole, double omega, double area,
                                 const PhysicalConstants& k = {}) {
  return omega * dipole * dipole / (2.0 * k.hbar * k.epsilon0 * area * k.c);
}

/// chi = 2 g_eff Delta / (Gamma^2/4 + Delta^2).
inline double compute_chi(double g_eff, double linewidth, double detuning) {
  if (detuning == 0.0) throw InvalidParameter("compute_chi: detuning must be non-zero");
  return 2.0 * g_eff * detuning / (0.25 * linewidth * linewidth + detuning * detuning);
}

/// Inverse of compute_chi in g_eff.
inline double coupling_for_chi(double chi, double linewidth, double detuning) {
  if (detuning == 0.0) throw InvalidParameter("coupling_for_chi: detuning must be non-zero");
  return chi * (0.25 * linewidth * linewidth + detuning * detuning) / (2.0 * detuning);
}

/// Dipole moment reproducing the reference operating point.
inline double default_dipole(const PhysicalConstants& k = {}) {
  const double g = coupling_for_chi(reference_point::chi, rb87::linewidth, reference_point::detuning);
  return std::sqrt(g * 2.0 * k.hbar * k.epsilon0 * reference_point::area * k.c / rb87::omega);
}

struct PhysicalParams {
  double linewidth = rb87::linewidth;            // Gamma, s^-1
  double detuning = reference_point::detuning;   // Delta, s^-1
  double dipole = default_dipole();              // C m
  double omega = rb87::omega;                    // s^-1
  double area = reference_point::area;           // m^2
  double photons = reference_point::photons;     // per pulse
  PhysicalConstants constants{};

  double g_eff() const { return effective_coupling(dipole, omega, area, constants); }

  void validate() const {
    if (!(linewidth > 0.0)) throw InvalidParameter("linewidth must be positive");
    if (!(omega > 0.0)) throw InvalidParameter("transition frequency must be positive");
    if (!(area > 0.0)) throw InvalidParameter("beam area must be positive");
    if (!(photons > 0.0)) throw InvalidParameter("photon number must be positive");
    if (detuning == 0.0 || !std::isfinite(detuning)) throw InvalidParameter("detuning must be finite and non-zero");
  }
};

inline double compute_chi(const PhysicalParams& p) {
  return compute_chi(p.g_eff(), p.linewidth, p.detuning);
}

/// Two ensembles entering the interferometer from opposite sides. The phases
/// are Phi_J = phi + theta and Phi_L = -phi + theta.
struct EnsembleConfig {
  double atoms_j = 0.0;
  double atoms_l = 0.0;
  double gamma = 0.0;  // |N_J - N_L| = gamma sqrt(Nbar)
  double alpha = 0.0;  // detection quality
  double phi = 0.0;    // Sagnac phase, rad
  double theta = 0.0;  // common phase, rad

  double mean_atoms() const { return 0.5 * (atoms_j + atoms_l); }
  double phase_j() const { return phi + theta; }
  double phase_l() const { return -phi + theta; }

  /// N_J = Nbar + gamma sqrt(Nbar)/2, N_L = Nbar - gamma sqrt(Nbar)/2.
  static EnsembleConfig from_mean(double nbar, double gamma, double alpha, double phi, double theta) {
    if (!(nbar > 0.0)) throw InvalidParameter("mean atom number must be positive");
    if (!(gamma >= 0.0)) throw InvalidParameter("gamma must be non-negative");
    const double half_gap = 0.5 * gamma * std::sqrt(nbar);
    EnsembleConfig c{nbar + half_gap, nbar - half_gap, gamma, alpha, phi, theta};
    c.validate();
    return c;
  }

  static EnsembleConfig from_counts(double atoms_j, double atoms_l, double alpha, double phi, double theta) {
    if (!(atoms_j > 0.0) || !(atoms_l > 0.0)) throw InvalidParameter("atom numbers must be positive");
    const double nbar = 0.5 * (atoms_j + atoms_l);
    EnsembleConfig c{atoms_j, atoms_l, std::abs(atoms_j - atoms_l) / std::sqrt(nbar), alpha, phi, theta};
    c.validate();
    return c;
  }

  void validate() const {
    if (!(atoms_j > 0.0) || !(atoms_l > 0.0)) throw InvalidParameter("atom numbers must be positive");
    if (!(alpha >= 0.0)) throw InvalidParameter("alpha must be non-negative");
    if (!(gamma >= 0.0)) throw InvalidParameter("gamma must be non-negative");
    if (!std::isfinite(phi) || !std::isfinite(theta)) throw InvalidParameter("phases must be finite");
    const double nbar = mean_atoms();
    if (std::abs(std::abs(atoms_j - atoms_l) - gamma * std::sqrt(nbar)) >= 1e-9 * nbar)
      throw InvalidParameter("gamma inconsistent with |N_J - N_L|");
  }
};

/// Mirror and final beam splitter folded with the accumulated phase:
/// R_x(-pi/2) R_z(Phi). Acting on (N/2) x^ it gives z = -(N/2) sin(Phi).
inline Rotation interferometer_rotation(double phase) {
  return Rotation::about_axis(Axis::x, -std::numbers::pi / 2.0) * Rotation::about_axis(Axis::z, phase);
}

/// Rotation-induced phase of a matter-wave interferometer: 4 pi A Omega m / h.
inline double sagnac_phase(double area, double angular_velocity, double mass,
                           const PhysicalConstants& k = {}) {
  return 4.0 * std::numbers::pi * area * angular_velocity * mass / k.planck;
}

/// Same enclosed area for a light interferometer: 4 pi A Omega / (lambda c).
inline double light_sagnac_phase(double area, double angular_velocity, double wavelength,
                                 const PhysicalConstants& k = {}) {
  return 4.0 * std::numbers::pi * area * angular_velocity / (wavelength * k.c);
}

}  // namespace diffint
