// SPDX-License-Identifier: Apache-2.0

#include "phc/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "phc/error.hpp"
#include "phc/io.hpp"

namespace phc::cli
{

namespace
{

Quasimomentum parse_k(const std::string &text)
{
  std::istringstream is(text);
  Quasimomentum k;
  char comma = 0;
  if (!(is >> k.k1 >> comma >> k.k2) || comma != ',' || !(is >> std::ws).eof())
  {
    throw ConfigError("--k", fmt::format("expected \"k1,k2\", got \"{}\"", text));
  }
  constexpr double pi = 3.14159265358979323846;
  if (std::abs(k.k1) > pi + 1e-9 || std::abs(k.k2) > pi + 1e-9)
  {
    throw ConfigError("--k", "components must lie in [-pi, pi]");
  }
  return k;
}

void print_values(std::ostream &out, const KSolution &sol)
{
  out << "re_nu,im_nu,residual\n";
  for (const BandValue &v : sol.values)
  {
    out << fmt::format("{:.12g},{:.12g},{:.3e}\n", v.nu.real(), v.nu.imag(), v.residual);
  }
}

int cmd_mesh(const RunConfig &cfg, const std::string &out_path, std::ostream &out)
{
  const Mesh mesh = build_unit_cell_mesh(cfg.geometry.n, cfg.geometry.radius(), cfg.geometry.boundary);
  if (out_path.empty())
  {
    write_mesh_dump(mesh, out);
    return kExitOk;
  }
  std::ofstream os(out_path);
  if (!os)
  {
    throw Error(fmt::format("cannot open '{}' for writing", out_path));
  }
  write_mesh_dump(mesh, os);
  return kExitOk;
}

int cmd_solve(const RunConfig &cfg, const Quasimomentum &k, std::ostream &out, std::ostream &err)
{
  const UnitCell cell = UnitCell::build(cfg.geometry.n, cfg.geometry.radius(), cfg.geometry.boundary);
  const KSolution sol =
      solve_at_k(cell, k, cfg.polarization, cfg.models(), cfg.window, cfg.solve);
  for (const std::string &w : sol.warnings)
  {
    err << "warning: " << w << '\n';
  }
  print_values(out, sol);
  return kExitOk;
}

int cmd_sweep(const RunConfig &cfg, std::ostream &out, std::ostream &err)
{
  const BandDiagram diagram = sweep(cfg.sweep_config());
  for (const BandPoint &p : diagram.points)
  {
    for (const std::string &w : p.warnings)
    {
      err << fmt::format("warning: k[{}]: {}\n", p.index, w);
    }
  }
  write_bands_csv(diagram, std::filesystem::path(cfg.outputs.csv_path));
  emit_svg(diagram, std::filesystem::path(cfg.outputs.svg_path));
  write_metadata(diagram, cfg, cfg.outputs.meta_path);
  out << fmt::format("{} k-points, {} eigenvalues -> {}, {}, {}\n", diagram.points.size(),
                     diagram.eigenvalue_count(), cfg.outputs.csv_path, cfg.outputs.svg_path,
                     cfg.outputs.meta_path);
  return kExitOk;
}

int cmd_oracle(const RunConfig &cfg, const Quasimomentum &k, std::ostream &out)
{
  const UnitCell cell = UnitCell::build(cfg.geometry.n, cfg.geometry.radius(), cfg.geometry.boundary);
  const OperatorFamily fam = cell.family(k, cfg.polarization, cfg.models());
  std::vector<Complex> roots;
  const char *kind = nullptr;
  if (cfg.material.is_constant() && cfg.background.is_constant())
  {
    kind = "dense_linear";
    roots = dense_linear_oracle(fam, cfg.window);
  }
  else if (cfg.polarization == Polarization::TE &&
           std::holds_alternative<law::Drude>(cfg.material.law()))
  {
    kind = "drude_polynomial";
    roots = drude_polynomial_oracle(fam, cfg.window);
  }
  else
  {
    throw ConfigError("material", "no oracle applies (needs constant regions, or TE with a "
                                  "vacuum background and a Drude disc)");
  }
  out << "# oracle: " << kind << '\n';
  out << "re_nu,im_nu\n";
  for (const Complex &nu : roots)
  {
    out << fmt::format("{:.12g},{:.12g}\n", nu.real(), nu.imag());
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Band structures of 2D dispersive photonic crystals", "phc_bands"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration")->required();

  std::string mesh_out;
  CLI::App *mesh = app.add_subcommand("mesh", "Write the unit-cell mesh dump");
  mesh->add_option("--out", mesh_out, "Output file (default: stdout)");

  std::string solve_k;
  CLI::App *solve = app.add_subcommand("solve", "Eigenvalues at a single quasimomentum");
  solve->add_option("--k", solve_k, "Quasimomentum as k1,k2")->required();

  app.add_subcommand("sweep", "Full band diagram along Gamma-X-M-Gamma");

  std::string oracle_k = "0,0";
  CLI::App *oracle = app.add_subcommand("oracle", "Dense reference eigenvalues at one k");
  oracle->add_option("--k", oracle_k, "Quasimomentum as k1,k2");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try
  {
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp &e)
  {
    return app.exit(e, out, err);
  }
  catch (const CLI::CallForVersion &e)
  {
    return app.exit(e, out, err);
  }
  catch (const CLI::ParseError &e)
  {
    app.exit(e, err, err);
    if (args.empty())
    {
      err << app.help();
    }
    return kExitConfig;
  }

  try
  {
    const RunConfig cfg = load_config(config_path);
    if (mesh->parsed())
    {
      return cmd_mesh(cfg, mesh_out, out);
    }
    if (solve->parsed())
    {
      return cmd_solve(cfg, parse_k(solve_k), out, err);
    }
    if (oracle->parsed())
    {
      return cmd_oracle(cfg, parse_k(oracle_k), out);
    }
    return cmd_sweep(cfg, out, err);
  }
  catch (const ConfigError &e)
  {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  catch (const GeometryError &e)
  {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  catch (const DomainError &e)
  {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  catch (const Error &e)
  {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}

int run(int argc, char **argv)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; i++)
  {
    args.emplace_back(argv[i]);
  }
  return run(args, std::cout, std::cerr);
}

}  // namespace phc::cli
