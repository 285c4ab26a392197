// SPDX-License-Identifier: Apache-2.0

#include "phc/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "phc/error.hpp"

#ifndef PHC_VERSION
#define PHC_VERSION "0.0.0"
#endif

namespace phc
{

namespace
{

using json = nlohmann::json;

// Typed access to one JSON object with dotted key names in every error.
class Section
{
public:
  Section(const json &node, std::string prefix) : node_(node), prefix_(std::move(prefix))
  {
    if (!node_.is_object())
    {
      throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected a JSON object");
    }
  }

  std::string key(const std::string &name) const
  {
    return prefix_.empty() ? name : prefix_ + "." + name;
  }

  bool has(const std::string &name) const { return node_.contains(name); }

  void only(std::initializer_list<const char *> allowed) const
  {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &item : node_.items())
    {
      if (!ok.contains(item.key()))
      {
        throw ConfigError(key(item.key()), "unknown key");
      }
    }
  }

  Section child(const std::string &name) const { return Section(node_.at(name), key(name)); }

  double number(const std::string &name) const
  {
    const json &v = require(name);
    if (!v.is_number())
    {
      throw ConfigError(key(name), "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x))
    {
      throw ConfigError(key(name), "expected a finite number");
    }
    return x;
  }

  double number(const std::string &name, double fallback) const
  {
    return has(name) ? number(name) : fallback;
  }

  double positive(const std::string &name, double fallback) const
  {
    const double x = number(name, fallback);
    if (!(x > 0.0))
    {
      throw ConfigError(key(name), fmt::format("must be positive, got {}", x));
    }
    return x;
  }

  long long integer(const std::string &name, long long fallback) const
  {
    if (!has(name))
    {
      return fallback;
    }
    const json &v = node_.at(name);
    if (!v.is_number_integer())
    {
      throw ConfigError(key(name), "expected an integer");
    }
    return v.get<long long>();
  }

  bool boolean(const std::string &name, bool fallback) const
  {
    if (!has(name))
    {
      return fallback;
    }
    const json &v = node_.at(name);
    if (!v.is_boolean())
    {
      throw ConfigError(key(name), "expected true or false");
    }
    return v.get<bool>();
  }

  std::string string(const std::string &name) const
  {
    const json &v = require(name);
    if (!v.is_string())
    {
      throw ConfigError(key(name), "expected a string");
    }
    return v.get<std::string>();
  }

  std::string string(const std::string &name, const std::string &fallback) const
  {
    return has(name) ? string(name) : fallback;
  }

private:
  const json &require(const std::string &name) const
  {
    if (!has(name))
    {
      throw ConfigError(key(name), "missing");
    }
    return node_.at(name);
  }

  const json &node_;
  std::string prefix_;
};

PermittivityModel parse_material(const Section &s, json &canon)
{
  s.only({"variant", "nu_p", "nu_tau", "gamma", "eps_re", "eps_im", "physical_units", "c0",
          "c1"});
  PermittivityBounds bounds;
  bounds.c0 = s.positive("c0", bounds.c0);
  bounds.c1 = s.positive("c1", bounds.c1);
  if (bounds.c1 < bounds.c0)
  {
    throw ConfigError(s.key("c1"), "must be >= c0");
  }
  const std::string variant = s.string("variant");
  canon = {{"variant", variant}, {"c0", bounds.c0}, {"c1", bounds.c1}};

  auto build = [&](auto make) -> PermittivityModel
  {
    try
    {
      return make();
    }
    catch (const DomainError &e)
    {
      throw ConfigError(s.key("variant"), e.what());
    }
  };

  if (variant == "constant")
  {
    const Complex eps(s.number("eps_re", 1.0), s.number("eps_im", 0.0));
    canon["eps_re"] = eps.real();
    canon["eps_im"] = eps.imag();
    return build([&] { return PermittivityModel::constant(eps, bounds); });
  }
  if (variant == "drude")
  {
    if (s.has("physical_units"))
    {
      if (s.has("nu_p") || s.has("nu_tau"))
      {
        throw ConfigError(s.key("physical_units"), "give either physical_units or nu_p/nu_tau");
      }
      const Section phys = s.child("physical_units");
      phys.only({"omega_p_thz", "omega_tau_thz", "a_meters"});
      const double thz = 2.0 * std::numbers::pi * 1e12;
      const double omega_p = phys.number("omega_p_thz") * thz;
      const double omega_tau = phys.number("omega_tau_thz", 0.0) * thz;
      const double a = phys.number("a_meters");
      if (!(a > 0.0))
      {
        throw ConfigError(phys.key("a_meters"), "must be positive");
      }
      PermittivityModel m =
          build([&] { return normalize_physical_drude(omega_p, omega_tau, a, bounds); });
      const auto &d = std::get<law::Drude>(m.law());
      canon["nu_p"] = d.nu_p;
      canon["nu_tau"] = d.nu_tau;
      return m;
    }
    const double nu_p = s.number("nu_p");
    const double nu_tau = s.number("nu_tau", 0.0);
    canon["nu_p"] = nu_p;
    canon["nu_tau"] = nu_tau;
    return build([&] { return PermittivityModel::drude(nu_p, nu_tau, bounds); });
  }
  if (variant == "lossy_drude")
  {
    const double nu_p = s.number("nu_p");
    const double gamma = s.number("gamma", 0.0);
    canon["nu_p"] = nu_p;
    canon["gamma"] = gamma;
    return build([&] { return PermittivityModel::lossy_drude(nu_p, gamma, bounds); });
  }
  throw ConfigError(s.key("variant"),
                    fmt::format("unknown variant '{}' (constant, drude, lossy_drude)", variant));
}

std::string fnv1a_hex(const std::string &text)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text)
  {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

std::ofstream open_for_write(const std::filesystem::path &path)
{
  std::ofstream os(path, std::ios::binary);
  if (!os)
  {
    throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  }
  return os;
}

}  // namespace

double GeometryConfig::radius() const
{
  return r ? *r : filling_fraction_to_radius(f.value_or(0.0));
}

SweepConfig RunConfig::sweep_config() const
{
  SweepConfig s;
  s.n = geometry.n;
  s.r = geometry.radius();
  s.boundary = geometry.boundary;
  s.polarization = polarization;
  s.models = models();
  s.window = window;
  s.options = solve;
  s.nk = nk;
  s.threads = threads;
  return s;
}

std::string RunConfig::hash() const
{
  return fnv1a_hex(canonical);
}

RunConfig parse_config(const std::string &json_text)
{
  json root;
  try
  {
    root = json::parse(json_text);
  }
  catch (const json::parse_error &e)
  {
    throw ConfigError("<root>", fmt::format("invalid JSON: {}", e.what()));
  }
  const Section top(root, "");
  top.only({"polarization", "geometry", "material", "background", "window", "sim", "path",
            "outputs"});

  RunConfig cfg;
  json canon;

  const std::string pol = top.string("polarization");
  if (pol == "TE")
  {
    cfg.polarization = Polarization::TE;
  }
  else if (pol == "TM")
  {
    cfg.polarization = Polarization::TM;
  }
  else
  {
    throw ConfigError("polarization", fmt::format("expected \"TE\" or \"TM\", got \"{}\"", pol));
  }
  canon["polarization"] = pol;

  if (!top.has("geometry"))
  {
    throw ConfigError("geometry", "missing");
  }
  {
    const Section g = top.child("geometry");
    g.only({"n", "r", "f", "boundary"});
    const long long n = g.integer("n", 16);
    if (n < 1 || n > 4096)
    {
      throw ConfigError(g.key("n"), fmt::format("must be in [1, 4096], got {}", n));
    }
    cfg.geometry.n = static_cast<int>(n);
    if (g.has("r") == g.has("f"))
    {
      throw ConfigError(g.key("r"), "give exactly one of geometry.r and geometry.f");
    }
    if (g.has("r"))
    {
      cfg.geometry.r = g.number("r");
      if (!(*cfg.geometry.r >= 0.0 && *cfg.geometry.r < 0.5))
      {
        throw ConfigError(g.key("r"), "must satisfy 0 <= r < 0.5");
      }
    }
    else
    {
      cfg.geometry.f = g.number("f");
      if (!(*cfg.geometry.f >= 0.0 && *cfg.geometry.f < std::numbers::pi / 4.0))
      {
        throw ConfigError(g.key("f"), "must satisfy 0 <= f < pi/4");
      }
    }
    if (g.has("boundary"))
    {
      const std::string b = g.string("boundary");
      if (b == "conforming")
      {
        cfg.geometry.boundary = DiscBoundary::Conforming;
      }
      else if (b == "staircase")
      {
        cfg.geometry.boundary = DiscBoundary::Staircase;
      }
      else
      {
        throw ConfigError(g.key("boundary"),
                          fmt::format("expected 'conforming' or 'staircase', got '{}'", b));
      }
    }
    canon["geometry"] = {{"n", cfg.geometry.n},
                         {"r", cfg.geometry.radius()},
                         {"boundary", to_string(cfg.geometry.boundary)}};
  }

  if (!top.has("material"))
  {
    throw ConfigError("material", "missing");
  }
  cfg.material = parse_material(top.child("material"), canon["material"]);
  if (top.has("background"))
  {
    cfg.background = parse_material(top.child("background"), canon["background"]);
  }
  else
  {
    canon["background"] = {{"variant", "constant"}, {"eps_re", 1.0}, {"eps_im", 0.0}};
  }

  if (top.has("window"))
  {
    const Section w = top.child("window");
    w.only({"re_min", "re_max", "im_min", "im_max"});
    cfg.window.re_min = w.number("re_min", cfg.window.re_min);
    cfg.window.re_max = w.number("re_max", cfg.window.re_max);
    cfg.window.im_min = w.number("im_min", cfg.window.im_min);
    cfg.window.im_max = w.number("im_max", cfg.window.im_max);
    if (!(cfg.window.re_max > cfg.window.re_min) || !(cfg.window.im_max >= cfg.window.im_min))
    {
      throw ConfigError("window", "window must be nonempty");
    }
  }
  canon["window"] = {{"re_min", cfg.window.re_min},
                     {"re_max", cfg.window.re_max},
                     {"im_min", cfg.window.im_min},
                     {"im_max", cfg.window.im_max}};

  SimConfig &sim = cfg.solve.sim;
  if (top.has("sim"))
  {
    const Section s = top.child("sim");
    s.only({"delta0", "beta0", "m0", "seed", "initial_side", "dedup_tol", "max_retries",
            "first_moment", "refine_tol", "refine_max_iter", "threads"});
    sim.delta0 = s.positive("delta0", sim.delta0);
    sim.beta0 = s.positive("beta0", sim.beta0);
    const long long m0 = s.integer("m0", sim.m0);
    if (m0 < 4 || m0 > 4096)
    {
      throw ConfigError(s.key("m0"), "must be in [4, 4096]");
    }
    sim.m0 = static_cast<int>(m0);
    const long long seed = s.integer("seed", static_cast<long long>(sim.seed));
    if (seed < 0)
    {
      throw ConfigError(s.key("seed"), "must be nonnegative");
    }
    sim.seed = static_cast<std::uint64_t>(seed);
    cfg.solve.initial_side = s.positive("initial_side", cfg.solve.initial_side);
    sim.dedup_tol = s.positive("dedup_tol", 2.0 * sim.beta0);
    if (sim.dedup_tol < sim.beta0)
    {
      throw ConfigError(s.key("dedup_tol"), "must be >= beta0");
    }
    const long long retries = s.integer("max_retries", sim.max_retries);
    if (retries < 0 || retries > 100)
    {
      throw ConfigError(s.key("max_retries"), "must be in [0, 100]");
    }
    sim.max_retries = static_cast<int>(retries);
    sim.first_moment = s.boolean("first_moment", sim.first_moment);
    cfg.solve.refine_tol = s.positive("refine_tol", cfg.solve.refine_tol);
    const long long iters = s.integer("refine_max_iter", cfg.solve.refine_max_iter);
    if (iters < 1)
    {
      throw ConfigError(s.key("refine_max_iter"), "must be positive");
    }
    cfg.solve.refine_max_iter = static_cast<int>(iters);
    const long long threads = s.integer("threads", cfg.threads);
    if (threads < 0)
    {
      throw ConfigError(s.key("threads"), "must be nonnegative");
    }
    cfg.threads = static_cast<int>(threads);
  }
  else
  {
    sim.dedup_tol = 2.0 * sim.beta0;
  }
  canon["sim"] = {{"delta0", sim.delta0},
                  {"beta0", sim.beta0},
                  {"m0", sim.m0},
                  {"seed", sim.seed},
                  {"initial_side", cfg.solve.initial_side},
                  {"dedup_tol", sim.dedup_tol},
                  {"max_retries", sim.max_retries},
                  {"first_moment", sim.first_moment},
                  {"refine_tol", cfg.solve.refine_tol},
                  {"refine_max_iter", cfg.solve.refine_max_iter}};

  if (top.has("path"))
  {
    const Section p = top.child("path");
    p.only({"nk"});
    const long long nk = p.integer("nk", cfg.nk);
    if (nk < 1 || nk > 100000)
    {
      throw ConfigError(p.key("nk"), "must be in [1, 100000]");
    }
    cfg.nk = static_cast<int>(nk);
  }
  canon["path"] = {{"nk", cfg.nk}};

  if (top.has("outputs"))
  {
    const Section o = top.child("outputs");
    o.only({"csv_path", "svg_path", "meta_path"});
    cfg.outputs.csv_path = o.string("csv_path", cfg.outputs.csv_path);
    cfg.outputs.svg_path = o.string("svg_path", cfg.outputs.svg_path);
    cfg.outputs.meta_path = o.string("meta_path", cfg.outputs.meta_path);
  }

  cfg.canonical = canon.dump();
  return cfg;
}

RunConfig load_config(const std::filesystem::path &path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
  {
    throw ConfigError("<file>", fmt::format("cannot read '{}'", path.string()));
  }
  std::ostringstream text;
  text << is.rdbuf();
  return parse_config(text.str());
}

std::vector<BandRow> band_rows(const BandDiagram &diagram)
{
  std::vector<BandRow> rows;
  for (const BandPoint &p : diagram.points)
  {
    for (const BandValue &v : p.values)
    {
      rows.push_back({p.index, p.k.k1, p.k.k2, p.arclength, v.nu.real(), v.nu.imag(),
                      v.residual});
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const BandRow &a, const BandRow &b)
                   {
                     return a.k_index < b.k_index ||
                            (a.k_index == b.k_index && a.re_nu < b.re_nu);
                   });
  return rows;
}

void write_bands_csv(const BandDiagram &diagram, std::ostream &os)
{
  os << kBandsCsvHeader << '\n';
  for (const BandRow &r : band_rows(diagram))
  {
    os << fmt::format("{},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", r.k_index, r.k1,
                      r.k2, r.arclength, r.re_nu, r.im_nu, r.residual);
  }
}

void write_bands_csv(const BandDiagram &diagram, const std::filesystem::path &path)
{
  std::ofstream os = open_for_write(path);
  write_bands_csv(diagram, os);
  if (!os)
  {
    throw Error(fmt::format("failed writing '{}'", path.string()));
  }
}

std::vector<BandRow> read_bands_csv(std::istream &is)
{
  std::string line;
  if (!std::getline(is, line) || line != kBandsCsvHeader)
  {
    throw Error("band table header mismatch");
  }
  std::vector<BandRow> rows;
  int lineno = 1;
  while (std::getline(is, line))
  {
    lineno++;
    if (line.empty())
    {
      continue;
    }
    std::istringstream fields(line);
    BandRow r;
    char c1, c2, c3, c4, c5, c6;
    fields >> r.k_index >> c1 >> r.k1 >> c2 >> r.k2 >> c3 >> r.arclength >> c4 >> r.re_nu >> c5 >>
        r.im_nu >> c6 >> r.residual;
    if (!fields || c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',' || c6 != ',')
    {
      throw Error(fmt::format("malformed band table line {}", lineno));
    }
    rows.push_back(r);
  }
  return rows;
}

void emit_svg(const BandDiagram &diagram, std::ostream &os)
{
  constexpr double width = 720.0, height = 480.0;
  constexpr double left = 70.0, right = 20.0, top = 20.0, bottom = 50.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  const double x_max = diagram.path.total_length() > 0.0 ? diagram.path.total_length() : 1.0;
  const double y_lo = std::min(0.0, diagram.window.re_min);
  const double y_hi = diagram.window.re_max > y_lo ? diagram.window.re_max : y_lo + 1.0;
  auto px = [&](double s) { return left + plot_w * s / x_max; };
  auto py = [&](double y) { return top + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo)); };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" "
                    "height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
                    width, height, width, height);
  os << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g id=\"axes\" stroke=\"black\" fill=\"none\" stroke-width=\"1\">\n";
  os << fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\"/>\n",
                    left, top, plot_w, plot_h);
  os << "</g>\n";

  os << "<g id=\"xticks\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">\n";
  for (std::size_t i = 0; i < diagram.path.node_arclength.size(); i++)
  {
    const double x = px(diagram.path.node_arclength[i]);
    os << fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
                      "stroke=\"#999999\" stroke-dasharray=\"3,3\"/>\n",
                      x, top, top + plot_h);
    os << fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", x, top + plot_h + 20.0,
                      diagram.path.labels[i]);
  }
  os << "</g>\n";

  const double span = y_hi - y_lo;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double step = raw / mag < 2.0 ? 2.0 * mag : (raw / mag < 5.0 ? 5.0 * mag : 10.0 * mag);
  os << "<g id=\"yticks\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">\n";
  for (double y = std::ceil(y_lo / step) * step; y <= y_hi + 1e-9 * span; y += step)
  {
    os << fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                      "stroke=\"black\"/>\n",
                      left - 5.0, py(y), left, py(y));
    os << fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{:.3g}</text>\n", left - 8.0,
                      py(y) + 4.0, std::abs(y) < 1e-12 ? 0.0 : y);
  }
  os << "</g>\n";
  os << fmt::format("<text x=\"18\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"14\" "
                    "transform=\"rotate(-90 18 {:.2f})\" text-anchor=\"middle\">"
                    "Re ν = ωa/2πc</text>\n",
                    top + 0.5 * plot_h, top + 0.5 * plot_h);

  os << "<g id=\"bands\" fill=\"#1f4e9c\" stroke=\"none\">\n";
  for (const BandRow &r : band_rows(diagram))
  {
    os << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\"/>\n", px(r.arclength),
                      py(r.re_nu));
  }
  os << "</g>\n";
  os << "</svg>\n";
}

void emit_svg(const BandDiagram &diagram, const std::filesystem::path &path)
{
  std::ofstream os = open_for_write(path);
  emit_svg(diagram, os);
  if (!os)
  {
    throw Error(fmt::format("failed writing '{}'", path.string()));
  }
}

const char *tool_version()
{
  return PHC_VERSION;
}

void write_metadata(const BandDiagram &diagram, const RunConfig &cfg,
                    const std::filesystem::path &path)
{
  json meta;
  meta["tool"] = "phc_bands";
  meta["version"] = tool_version();
  meta["seed"] = cfg.solve.sim.seed;
  meta["config_hash"] = cfg.hash();
  meta["config"] = json::parse(cfg.canonical);
  meta["k_points"] = diagram.points.size();
  meta["eigenvalue_count"] = diagram.eigenvalue_count();
  json prov = json::object();
  for (const auto &[k, v] : diagram.provenance)
  {
    prov[k] = v;
  }
  meta["provenance"] = prov;
  json warnings = json::array();
  for (const BandPoint &p : diagram.points)
  {
    for (const std::string &w : p.warnings)
    {
      warnings.push_back({{"k_index", p.index}, {"message", w}});
    }
  }
  meta["warnings"] = warnings;

  std::ofstream os = open_for_write(path);
  os << meta.dump(2) << '\n';
}

}  // namespace phc
