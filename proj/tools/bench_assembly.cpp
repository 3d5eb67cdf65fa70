// Benchmarks the OpenMP assembly kernels against the serial reference and
// verifies the two produce bit-identical matrices.
//
// Usage: xg_bench [n] [k] [reps]   (defaults: n=64, k=1, reps=3)

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "xg/presets.hpp"
#include "xg/verify.hpp"

using namespace xg;

namespace {

template <typename F>
double best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

bool identical(const SpMat& a, const SpMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  SpMat ac = a, bc = b;
  ac.makeCompressed();
  bc.makeCompressed();
  if (ac.nonZeros() != bc.nonZeros()) return false;
  for (int i = 0; i < ac.nonZeros(); ++i)
    if (ac.valuePtr()[i] != bc.valuePtr()[i] ||
        ac.innerIndexPtr()[i] != bc.innerIndexPtr()[i])
      return false;
  for (int i = 0; i <= ac.outerSize(); ++i)
    if (ac.outerIndexPtr()[i] != bc.outerIndexPtr()[i]) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 64;
  int k = argc > 2 ? std::atoi(argv[2]) : 1;
  int reps = argc > 3 ? std::atoi(argv[3]) : 3;
  if (n < 1 || k < 0 || reps < 1) {
    std::fprintf(stderr, "usage: xg_bench [n>=1] [k>=0] [reps>=1]\n");
    return 2;
  }
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif

  Preset pr = make_preset("hdg-grad", k);
  Mesh2D mesh = build_structured_unit_square(n);
  Spaces spaces = build_spaces(mesh, pr.config);
  ProblemData data = find_case("C1").data();
  std::printf("mesh %dx%d (%d cells), hdg-grad k=%d, %d dofs, %d thread(s)\n",
              n, n, mesh.n_cells(), k, spaces.total, threads);

  struct Kernel {
    const char* name;
    SpMat (*run)(const Mesh2D&, const Spaces&, const ProblemData&,
                 const MethodConfig&, AssemblyMode);
  };
  auto a_kernel = [](const Mesh2D& m, const Spaces& s, const ProblemData& d,
                     const MethodConfig& c, AssemblyMode mode) {
    return assemble_a(m, s, d, c, mode);
  };
  auto b_kernel = [](const Mesh2D& m, const Spaces& s, const ProblemData&,
                     const MethodConfig& c, AssemblyMode mode) {
    return assemble_b_grad(m, s, c, mode);
  };
  auto c_kernel = [](const Mesh2D& m, const Spaces& s, const ProblemData&,
                     const MethodConfig& c, AssemblyMode mode) {
    return assemble_c(m, s, c, mode);
  };
  const Kernel kernels[] = {
      {"assemble_a", a_kernel}, {"assemble_b", b_kernel},
      {"assemble_c", c_kernel}};

  std::printf("%-12s %12s %12s %9s  %s\n", "kernel", "serial[s]",
              "parallel[s]", "speedup", "bit-identical");
  bool all_ok = true;
  for (const Kernel& kn : kernels) {
    SpMat ms, mp;
    double ts = best_of(reps, [&] {
      ms = kn.run(mesh, spaces, data, pr.config, AssemblyMode::Serial);
    });
    double tp = best_of(reps, [&] {
      mp = kn.run(mesh, spaces, data, pr.config, AssemblyMode::Parallel);
    });
    bool same = identical(ms, mp);
    all_ok = all_ok && same;
    std::printf("%-12s %12.4f %12.4f %8.2fx  %s\n", kn.name, ts, tp, ts / tp,
                same ? "yes" : "NO");
  }
  if (!all_ok) {
    std::fprintf(stderr, "serial and parallel assembly disagree\n");
    return 1;
  }
  return 0;
}
