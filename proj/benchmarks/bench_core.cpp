#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "alignlab/kinetic.hpp"
#include "alignlab/metrics.hpp"
#include "alignlab/micro.hpp"

namespace {

using namespace alignlab;

ParticleEnsemble random_ensemble(int n, int dim) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TorusGeometry geom(dim, 1.0);
  std::vector<Vec> x(n), v(n);
  for (int i = 0; i < n; ++i) {
    x[i] = {u(rng), dim == 2 ? u(rng) : 0.0};
    v[i] = {u(rng) - 0.5, dim == 2 ? u(rng) - 0.5 : 0.0};
  }
  return ParticleEnsemble(geom, std::move(x), std::move(v), std::vector<double>(n, 1.0 / n));
}

void BM_CuckerSmaleForce(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ens = random_ensemble(n, 2);
  const auto model = MicroModel::cucker_smale(1.0, CommunicationKernel::inverse_power(1.0, ens.geom));
  for (auto _ : state) benchmark::DoNotOptimize(acceleration(model, ens));
  state.SetComplexityN(n);
}
BENCHMARK(BM_CuckerSmaleForce)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_WModelStep(benchmark::State& state) {
  const auto ens = random_ensemble(static_cast<int>(state.range(0)), 1);
  const auto k = CommunicationKernel::inverse_power(1.0, ens.geom);
  const GridSpec grid(ens.geom, 128);
  const auto model = MicroModel::w_model(1.0, k, WeightField(GridField(grid, 1.0)));
  for (auto _ : state) benchmark::DoNotOptimize(step(model, ens, 1e-3));
}
BENCHMARK(BM_WModelStep)->Arg(200);

void BM_KineticStep(benchmark::State& state) {
  const int nx = static_cast<int>(state.range(0));
  const KineticGrid g(1.0, nx, 2 * nx, 6.0);
  const GridSpec xg = g.x_grid();
  const GridField rho = GridField::from_function(xg, [](const Vec& x) {
    return 1.0 + 0.2 * std::cos(2.0 * std::numbers::pi * x[0]);
  });
  const GridField u = GridField::from_function(xg, [](const Vec& x) {
    return 0.1 * std::sin(2.0 * std::numbers::pi * x[0]);
  });
  const auto k = CommunicationKernel::inverse_power(1.0, xg.geom);
  KineticState s = make_kinetic_state(g, local_maxwellian(g, rho, u, 1.0), KineticParams{},
                                      AveragingModel::favre(k), GridField(xg, 1.0));
  const double dt = kinetic_admissible_dt(s);
  for (auto _ : state) benchmark::DoNotOptimize(kinetic_step(s, KineticRegime::Maxwellian, dt));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_KineticStep)->Arg(64)->Arg(128);

void BM_NetworkSimplex(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TorusGeometry geom(2, 1.0);
  std::vector<Vec> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = {u(rng), u(rng)};
    y[i] = {u(rng), u(rng)};
  }
  const std::vector<double> a(n, 1.0 / n), b(n, 1.0 / n);
  for (auto _ : state) benchmark::DoNotOptimize(w_p_empirical(geom, x, a, y, b, 1));
  state.SetComplexityN(n);
}
BENCHMARK(BM_NetworkSimplex)->RangeMultiplier(2)->Range(50, 400);

}  // namespace

BENCHMARK_MAIN();
