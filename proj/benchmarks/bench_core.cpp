// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <map>
#include <numbers>

#include "phc/bands.hpp"

using namespace phc;

namespace
{

const RegionModels kDrudeDisc{PermittivityModel(), PermittivityModel::lossy_drude(1.0, 0.01)};
const Quasimomentum kX{std::numbers::pi, 0.0};

const UnitCell &cell(int n)
{
  static std::map<int, UnitCell> cache;
  auto it = cache.find(n);
  if (it == cache.end())
  {
    it = cache.emplace(n, UnitCell::build(n, filling_fraction_to_radius(0.2827))).first;
  }
  return it->second;
}

void BM_Mesh(benchmark::State &state)
{
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(build_unit_cell_mesh(n, 0.3));
  }
}
BENCHMARK(BM_Mesh)->Arg(24)->Arg(48)->Unit(benchmark::kMicrosecond);

void BM_Assembly(benchmark::State &state)
{
  const UnitCell &c = cell(static_cast<int>(state.range(0)));
  for (auto _ : state)
  {
    FemAssembly a(c.mesh, c.pmap);
    benchmark::DoNotOptimize(a.n_dofs());
  }
}
BENCHMARK(BM_Assembly)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_BuildT(benchmark::State &state)
{
  const OperatorFamily fam = cell(static_cast<int>(state.range(0))).family(kX, Polarization::TM, kDrudeDisc);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(fam.build_T({0.47, -0.001}));
  }
}
BENCHMARK(BM_BuildT)->Arg(24)->Arg(48)->Unit(benchmark::kMicrosecond);

void BM_FactorizeSolve(benchmark::State &state)
{
  const OperatorFamily fam = cell(static_cast<int>(state.range(0))).family(kX, Polarization::TM, kDrudeDisc);
  const SparseMatrix t = fam.build_T({0.47, -0.001});
  const ComplexVector g = random_probe(fam.size(), 1);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(factorize(t, fam.analysis()).solve(g));
  }
}
BENCHMARK(BM_FactorizeSolve)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_Indicator(benchmark::State &state)
{
  const OperatorFamily fam = cell(static_cast<int>(state.range(0))).family(kX, Polarization::TM, kDrudeDisc);
  const ComplexVector g = random_probe(fam.size(), 1);
  const SimConfig cfg;
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(indicator({{0.47, 0.0}, 0.05}, fam, g, cfg));
  }
}
BENCHMARK(BM_Indicator)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
