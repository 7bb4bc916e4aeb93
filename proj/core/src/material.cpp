#include "cemfrac/material.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace cemfrac {

LameConstants lame_from_engineering(double E, double nu) {
  if (nu >= 0.5) throw Error("Poisson ratio " + std::to_string(nu) + " is incompressible or beyond");
  if (nu <= -1.0) throw Error("Poisson ratio must exceed -1");
  return {E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), E / (2.0 * (1.0 + nu))};
}

IsotropicElastic::IsotropicElastic(double E, double nu, double rho, double Gc)
    : E_(E), nu_(nu), rho_(rho), Gc_(Gc), lame_{0.0, 0.0} {
  if (!(E > 0.0) || !std::isfinite(E)) throw Error("Young's modulus must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error("density must be positive");
  if (!(Gc >= 0.0)) throw Error("critical energy release rate must be non-negative");
  lame_ = lame_from_engineering(E, nu);
}

Voigt6 stress_from_strain(const IsotropicElastic& mat, const Voigt6& eps) {
  const double lam = mat.lambda();
  const double mu = mat.mu();
  const double tr = eps[0] + eps[1] + eps[2];
  Voigt6 s;
  s[0] = lam * tr + 2.0 * mu * eps[0];
  s[1] = lam * tr + 2.0 * mu * eps[1];
  s[2] = lam * tr + 2.0 * mu * eps[2];
  s[3] = mu * eps[3];
  s[4] = mu * eps[4];
  s[5] = mu * eps[5];
  return s;
}

double strain_energy_density(const IsotropicElastic& mat, const Voigt6& eps) {
  const double tr = eps[0] + eps[1] + eps[2];
  // eps:eps with engineering shears: gamma^2 / 2 per off-diagonal pair.
  const double ee = eps[0] * eps[0] + eps[1] * eps[1] + eps[2] * eps[2] +
                    0.5 * (eps[3] * eps[3] + eps[4] * eps[4] + eps[5] * eps[5]);
  return 0.5 * mat.lambda() * tr * tr + mat.mu() * ee;
}

Mat3 stress_tensor(const Voigt6& s) {
  Mat3 m;
  m << s[0], s[3], s[5],
       s[3], s[1], s[4],
       s[5], s[4], s[2];
  return m;
}

Mat3 strain_tensor(const Voigt6& e) {
  Mat3 m;
  m << e[0], 0.5 * e[3], 0.5 * e[5],
       0.5 * e[3], e[1], 0.5 * e[4],
       0.5 * e[5], 0.5 * e[4], e[2];
  return m;
}

PrincipalStress max_principal_stress(const Voigt6& stress) {
  const Mat3 m = stress_tensor(stress);
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return {0.0, Vec3::UnitX()};

  Eigen::SelfAdjointEigenSolver<Mat3> solver(m);
  const Vec3 values = solver.eigenvalues();  // ascending
  const Mat3 vectors = solver.eigenvectors();
  const double top = values[2];
  const double tol = 1e-10 * scale;

  Vec3 dir = vectors.col(2);
  int multiplicity = 1;
  if (top - values[1] <= tol) multiplicity = (top - values[0] <= tol) ? 3 : 2;
  if (multiplicity > 1) {
    // Project the coordinate axes onto the eigenspace, lowest index first.
    Eigen::Matrix<double, 3, Eigen::Dynamic> basis = vectors.rightCols(multiplicity);
    for (int axis = 0; axis < 3; ++axis) {
      const Vec3 e = Vec3::Unit(axis);
      const Vec3 proj = basis * (basis.transpose() * e);
      if (proj.norm() > 1e-8) {
        dir = proj.normalized();
        break;
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (std::abs(dir[i]) > 1e-12) {
      if (dir[i] < 0.0) dir = -dir;
      break;
    }
  }
  return {top, dir};
}

WaveSpeeds wave_speeds(const IsotropicElastic& mat) {
  const double cd = std::sqrt((mat.lambda() + 2.0 * mat.mu()) / mat.rho());
  const double cs = std::sqrt(mat.mu() / mat.rho());
  const double nu = mat.nu();
  return {cd, cs, cs * (0.862 + 1.14 * nu) / (1.0 + nu)};
}

}  // namespace cemfrac
