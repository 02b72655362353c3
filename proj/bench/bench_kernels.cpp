#include <benchmark/benchmark.h>

#include <random>

#include "quasilap/kernels.hpp"

using namespace quasilap::kernels;

namespace {

std::vector<cplx> random_field(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> v(n);
  for (auto& x : v) x = {u(rng), u(rng)};
  return v;
}

FourierAssembly make_assembly(int n, int cutoff) {
  FourierAssembly a;
  a.n = n;
  for (int r = -cutoff; r <= cutoff; ++r)
    for (int c = -cutoff; c <= cutoff; ++c) {
      a.mode_row.push_back((r + n) % n);
      a.mode_col.push_back((c + n) % n);
    }
  for (unsigned f = 0; f < 5; ++f) {
    a.spectra.push_back(random_field(static_cast<std::size_t>(n) * n, 11 + f));
    a.symbols.push_back(random_field(a.mode_row.size(), 23 + f));
  }
  return a;
}

template <auto Scan>
void BM_symbol_scan(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0) * state.range(0));
  const auto a = random_field(n, 1), b = random_field(n, 2), c = random_field(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Scan(a.data(), b.data(), c.data(), n, 32));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * 32);
}

template <auto Assemble>
void BM_assemble(benchmark::State& state) {
  const auto a = make_assembly(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const std::size_t m = a.mode_row.size();
  std::vector<cplx> out(m * m);
  for (auto _ : state) {
    Assemble(a, out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m * m));
}

}  // namespace

BENCHMARK(BM_symbol_scan<symbol_scan_serial>)->Name("symbol_scan/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_symbol_scan<symbol_scan_omp>)->Name("symbol_scan/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_assemble<assemble_fourier_matrix_serial>)->Name("assemble/serial")->Args({32, 7})->Args({64, 15});
BENCHMARK(BM_assemble<assemble_fourier_matrix_omp>)->Name("assemble/omp")->Args({32, 7})->Args({64, 15});

BENCHMARK_MAIN();
