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

#include "safeset/metrics.hpp"

using namespace safeset::metrics;

namespace {

void BM_EpsilonBarExact(benchmark::State& state) {
  const auto s = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(epsilon_bar_exact(s, s / 4, 1e-3));
}
BENCHMARK(BM_EpsilonBarExact)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_PositionalEpsilonBar(benchmark::State& state) {
  const auto td = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(algorithm3_epsilon_bar(td - td / 4, td, 1e-3));
}
BENCHMARK(BM_PositionalEpsilonBar)->Arg(1000)->Arg(100000);

}  // namespace
