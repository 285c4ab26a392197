// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phc/bands.hpp"

namespace phc
{

struct GeometryConfig
{
  int n = 16;
  std::optional<double> r;
  std::optional<double> f;
  DiscBoundary boundary = DiscBoundary::Conforming;

  /// Disc radius, derived from f when r is absent.
  double radius() const;
};

struct OutputConfig
{
  std::string csv_path = "bands.csv";
  std::string svg_path = "bands.svg";
  std::string meta_path = "bands.meta.json";
};

//
// Validated run description. The disc material is configurable; the
// background is vacuum unless a "background" block is given.
//
struct RunConfig
{
  Polarization polarization = Polarization::TE;
  GeometryConfig geometry;
  PermittivityModel material;
  PermittivityModel background;
  Window window;
  SolveOptions solve;
  int nk = 16;
  int threads = 1;
  OutputConfig outputs;
  std::string canonical;  // normalized JSON used for hashing

  RegionModels models() const { return {background, material}; }
  SweepConfig sweep_config() const;
  /// FNV-1a 64 of the canonical JSON, as 16 hex digits.
  std::string hash() const;
};

/// Parses a JSON object. Throws ConfigError naming the offending key.
RunConfig parse_config(const std::string &json_text);

/// Throws ConfigError (key "<file>") if the file cannot be read.
RunConfig load_config(const std::filesystem::path &path);

inline constexpr const char *kBandsCsvHeader = "k_index,k1,k2,arclength,re_nu,im_nu,residual";

struct BandRow
{
  int k_index = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  double arclength = 0.0;
  double re_nu = 0.0;
  double im_nu = 0.0;
  double residual = 0.0;
};

/// Rows sorted by (k_index, re_nu), 12 significant digits.
std::vector<BandRow> band_rows(const BandDiagram &diagram);

void write_bands_csv(const BandDiagram &diagram, std::ostream &os);
/// Throws Error if the path cannot be written.
void write_bands_csv(const BandDiagram &diagram, const std::filesystem::path &path);

/// Parses a file produced by write_bands_csv. Throws Error on a malformed line.
std::vector<BandRow> read_bands_csv(std::istream &is);

/// Scatter plot of Re nu over the path arclength with Gamma/X/M/Gamma ticks.
void emit_svg(const BandDiagram &diagram, std::ostream &os);
void emit_svg(const BandDiagram &diagram, const std::filesystem::path &path);

/// Provenance JSON: tool version, seed, config hash, counts and warnings.
void write_metadata(const BandDiagram &diagram, const RunConfig &cfg,
                    const std::filesystem::path &path);

const char *tool_version();

}  // namespace phc
