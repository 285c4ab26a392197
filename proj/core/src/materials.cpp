// SPDX-License-Identifier: Apache-2.0

#include "phc/materials.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "phc/error.hpp"

namespace phc
{

namespace
{

template <class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};

void validate(const PermittivityModel::Law &law, const PermittivityBounds &bounds)
{
  if (!(bounds.c0 > 0.0) || !(bounds.c1 >= bounds.c0) || !std::isfinite(bounds.c1))
  {
    throw DomainError(fmt::format("permittivity bounds require 0 < C0 <= C1 < inf, got [{}, {}]",
                                  bounds.c0, bounds.c1));
  }
  std::visit(overloaded{
                 [&](const law::Constant &c)
                 {
                   const double mag = std::abs(c.eps);
                   if (!(mag >= bounds.c0 && mag <= bounds.c1))
                   {
                     throw DomainError(fmt::format(
                         "constant permittivity magnitude {} outside [{}, {}]", mag, bounds.c0,
                         bounds.c1));
                   }
                 },
                 // nu_p = 0 is admitted: it is the vacuum limit of both laws.
                 [](const law::Drude &d)
                 {
                   if (!(d.nu_p >= 0.0) || !(d.nu_tau >= 0.0))
                   {
                     throw DomainError(fmt::format("drude requires nu_p >= 0 and nu_tau >= 0, got "
                                                   "nu_p={}, nu_tau={}",
                                                   d.nu_p, d.nu_tau));
                   }
                 },
                 [](const law::LossyDrude &d)
                 {
                   if (!(d.nu_p >= 0.0) || !(d.gamma >= 0.0))
                   {
                     throw DomainError(fmt::format("lossy drude requires nu_p >= 0 and gamma >= "
                                                   "0, got nu_p={}, gamma={}",
                                                   d.nu_p, d.gamma));
                   }
                 },
             },
             law);
}

}  // namespace

PermittivityModel::PermittivityModel(Law law, PermittivityBounds bounds)
  : law_(law), bounds_(bounds)
{
  validate(law_, bounds_);
}

PermittivityModel PermittivityModel::constant(Complex eps, PermittivityBounds bounds)
{
  return PermittivityModel(law::Constant{eps}, bounds);
}

PermittivityModel PermittivityModel::drude(double nu_p, double nu_tau, PermittivityBounds bounds)
{
  return PermittivityModel(law::Drude{nu_p, nu_tau}, bounds);
}

PermittivityModel PermittivityModel::lossy_drude(double nu_p, double gamma,
                                                 PermittivityBounds bounds)
{
  return PermittivityModel(law::LossyDrude{nu_p, gamma}, bounds);
}

std::string PermittivityModel::describe() const
{
  return std::visit(
      overloaded{
          [](const law::Constant &c)
          { return fmt::format("constant(eps={}{:+}i)", c.eps.real(), c.eps.imag()); },
          [](const law::Drude &d)
          { return fmt::format("drude(nu_p={}, nu_tau={})", d.nu_p, d.nu_tau); },
          [](const law::LossyDrude &d)
          { return fmt::format("lossy_drude(nu_p={}, gamma={})", d.nu_p, d.gamma); },
      },
      law_);
}

Complex eval_eps(const PermittivityModel &model, Complex nu)
{
  using namespace std::complex_literals;
  auto pole = [&](Complex denom, const char *name)
  {
    if (denom == 0.0)
    {
      throw SingularityError(
          fmt::format("{} permittivity has a pole at nu={}{:+}i", name, nu.real(), nu.imag()));
    }
  };
  return std::visit(overloaded{
                        [](const law::Constant &c) { return c.eps; },
                        [&](const law::Drude &d)
                        {
                          const Complex denom = nu * nu - 1.0i * nu * d.nu_tau;
                          pole(denom, "drude");
                          return 1.0 - d.nu_p * d.nu_p / denom;
                        },
                        [&](const law::LossyDrude &d)
                        {
                          const Complex denom = nu * (nu + 1.0i * d.gamma);
                          pole(denom, "lossy drude");
                          return 1.0 - d.nu_p * d.nu_p / denom;
                        },
                    },
                    model.law());
}

bool check_bounds(const PermittivityModel &model, Complex nu)
{
  Complex eps;
  try
  {
    eps = eval_eps(model, nu);
  }
  catch (const SingularityError &)
  {
    return false;
  }
  const double mag = std::abs(eps);
  return std::isfinite(mag) && mag >= model.bounds().c0 && mag <= model.bounds().c1;
}

PermittivityModel normalize_physical_drude(double omega_p, double omega_tau, double a,
                                           PermittivityBounds bounds)
{
  if (!(a > 0.0))
  {
    throw DomainError(fmt::format("lattice constant must be positive, got {}", a));
  }
  const double scale = a / (2.0 * std::numbers::pi * kSpeedOfLight);
  return PermittivityModel::drude(omega_p * scale, omega_tau * scale, bounds);
}

}  // namespace phc
