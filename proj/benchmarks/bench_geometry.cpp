/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/
#include <benchmark/benchmark.h>

#include <random>

#include "safeset/geometry/alpha_shape.hpp"
#include "safeset/geometry/delaunay.hpp"
#include "safeset/geometry/mc_volume.hpp"

using namespace safeset::geometry;

namespace {

std::vector<Point> cloud(int n, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(static_cast<std::size_t>(count), Point(static_cast<std::size_t>(n)));
  for (auto& p : pts) {
    for (auto& x : p) x = u(rng);
  }
  return pts;
}

void BM_Delaunay(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto pts = cloud(n, static_cast<int>(state.range(1)), 11);
  for (auto _ : state) {
    auto c = delaunay(pts);
    benchmark::DoNotOptimize(c.top().size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Delaunay)->Args({2, 1000})->Args({3, 1000})->Args({3, 5000})->Args({4, 500})->Args({6, 100})
    ->Unit(benchmark::kMillisecond);

void BM_AlphaSearch(benchmark::State& state) {
  const auto pts = cloud(3, static_cast<int>(state.range(0)), 12);
  auto complex = std::make_shared<const SimplicialComplex>(delaunay(pts));
  for (auto _ : state) {
    auto r = search_optimal_alpha(complex);
    benchmark::DoNotOptimize(r.alpha_star);
  }
}
BENCHMARK(BM_AlphaSearch)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_AlphaContains(benchmark::State& state) {
  const auto pts = cloud(3, 2000, 13);
  auto complex = std::make_shared<const SimplicialComplex>(delaunay(pts));
  const AlphaShape shape = alpha_complex(complex, 0.2);
  const auto queries = cloud(3, 4096, 14);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(shape.contains(queries[i++ & 4095].data()));
  }
}
BENCHMARK(BM_AlphaContains);

void BM_McVolumeBall(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Box box{std::vector<double>(static_cast<std::size_t>(n), -1.0), std::vector<double>(static_cast<std::size_t>(n), 1.0)};
  auto ball = [n](const double* q) {
    double r = 0.0;
    for (int d = 0; d < n; ++d) r += q[d] * q[d];
    return r <= 1.0;
  };
  for (auto _ : state) {
    auto v = mc_volume(ball, box, 100000, 5);
    benchmark::DoNotOptimize(v.estimate);
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_McVolumeBall)->Arg(3)->Arg(17)->Unit(benchmark::kMillisecond);

}  // namespace
