#pragma once

#include <utility>

#include "cemfrac/types.hpp"

namespace cemfrac {

struct LameConstants {
  double lambda;
  double mu;
};

/// lambda = E nu / ((1 + nu)(1 - 2 nu)), mu = E / (2 (1 + nu)).
/// Throws Error for nu >= 0.5 (incompressible) or nu <= -1.
LameConstants lame_from_engineering(double E, double nu);

/// Isotropic linear elastic solid with a critical energy release rate.
class IsotropicElastic {
public:
  /// Throws Error when E <= 0, nu outside (-1, 0.5), rho <= 0 or Gc < 0.
  /// Gc may be +infinity (fracture disabled).
  IsotropicElastic(double E, double nu, double rho, double Gc);

  double E() const noexcept { return E_; }
  double nu() const noexcept { return nu_; }
  double rho() const noexcept { return rho_; }
  double Gc() const noexcept { return Gc_; }
  double lambda() const noexcept { return lame_.lambda; }
  double mu() const noexcept { return lame_.mu; }

private:
  double E_;
  double nu_;
  double rho_;
  double Gc_;
  LameConstants lame_;
};

/// sigma = lambda tr(eps) I + 2 mu eps. Strain shears are engineering
/// (gamma = 2 eps_ij); stress shears are tensor components.
Voigt6 stress_from_strain(const IsotropicElastic& mat, const Voigt6& strain);

/// psi = 1/2 lambda tr(eps)^2 + mu eps:eps.
double strain_energy_density(const IsotropicElastic& mat, const Voigt6& strain);

Mat3 stress_tensor(const Voigt6& stress);
Mat3 strain_tensor(const Voigt6& strain);

struct PrincipalStress {
  double value;
  Vec3 direction;  // unit length, first nonzero component positive
};

/// Largest eigenvalue of the stress tensor and its eigenvector. Repeated
/// maxima resolve to the eigenspace vector closest to the lowest-index axis.
PrincipalStress max_principal_stress(const Voigt6& stress);

struct WaveSpeeds {
  double dilatational;
  double shear;
  double rayleigh;
};

/// c_d = sqrt((lambda + 2 mu) / rho), c_s = sqrt(mu / rho),
/// v_R = c_s (0.862 + 1.14 nu) / (1 + nu).
WaveSpeeds wave_speeds(const IsotropicElastic& mat);

}  // namespace cemfrac
