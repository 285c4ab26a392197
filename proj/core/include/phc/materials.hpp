// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <string>
#include <variant>

namespace phc
{

using Complex = std::complex<double>;

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 2.99792458e8;

//
// Frequency laws. Every frequency is normalized, nu = omega a / (2 pi c), so
// that (omega/c)^2 = (2 pi nu)^2 with a = c = 1.
//
namespace law
{

struct Constant
{
  Complex eps{1.0, 0.0};
};

/// eps(nu) = 1 - nu_p^2 / (nu^2 - i nu nu_tau).
struct Drude
{
  double nu_p = 1.0;
  double nu_tau = 0.0;
};

/// eps(nu) = 1 - nu_p^2 / (nu (nu + i gamma)).
struct LossyDrude
{
  double nu_p = 1.0;
  double gamma = 0.0;
};

}  // namespace law

/// Admissibility window C0 <= |eps| <= C1.
struct PermittivityBounds
{
  double c0 = 1e-8;
  double c1 = 1e12;
};

class PermittivityModel
{
public:
  using Law = std::variant<law::Constant, law::Drude, law::LossyDrude>;

  /// Vacuum, eps = 1.
  PermittivityModel() = default;

  /// Throws DomainError if the law parameters or bounds are invalid.
  explicit PermittivityModel(Law law, PermittivityBounds bounds = {});

  static PermittivityModel constant(Complex eps, PermittivityBounds bounds = {});
  static PermittivityModel drude(double nu_p, double nu_tau, PermittivityBounds bounds = {});
  static PermittivityModel lossy_drude(double nu_p, double gamma,
                                       PermittivityBounds bounds = {});

  const Law &law() const { return law_; }
  const PermittivityBounds &bounds() const { return bounds_; }

  bool is_constant() const { return std::holds_alternative<law::Constant>(law_); }

  /// Short human-readable description, e.g. "drude(nu_p=1, nu_tau=0.01)".
  std::string describe() const;

private:
  Law law_{law::Constant{}};
  PermittivityBounds bounds_{};
};

/// Complex permittivity at nu. Throws SingularityError at a pole of the law.
Complex eval_eps(const PermittivityModel &model, Complex nu);

/// True iff C0 <= |eps(nu)| <= C1. Poles report false.
bool check_bounds(const PermittivityModel &model, Complex nu);

/// Converts physical Drude parameters (angular frequencies in rad/s, lattice
/// constant in meters) to the normalized law. Throws DomainError if a <= 0.
PermittivityModel normalize_physical_drude(double omega_p, double omega_tau, double a,
                                           PermittivityBounds bounds = {});

}  // namespace phc
