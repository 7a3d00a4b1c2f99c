// SPDX-License-Identifier: Apache-2.0
//
// Serial vs OpenMP timings for the parallel kernels. Each pair is also
// checked for identical output.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "effsearch/landscape.hpp"
#include "effsearch/pareto.hpp"
#include "effsearch/surrogate.hpp"

using namespace effsearch;

namespace {

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-28s %10.4f %10.4f %8.2fx  %s\n", name, serial, parallel, serial / parallel, same ? "same" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::stoi(argv[1]) : 3;
  std::printf("threads: %d\n", max_threads());
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial s", "parallel s", "speedup");

  const auto land = SyntheticLandscape::generate(0, LandscapeProfile::Default);
  const auto all = enumerate(ConfigSpace::full());

  std::vector<PerformanceVector> a, b;
  const double es = best_of(reps, [&] { a = evaluate_all(all, land, Exec::Serial); });
  const double ep = best_of(reps, [&] { b = evaluate_all(all, land, Exec::Parallel); });
  row("evaluate 51240 configs", es, ep, a == b);

  std::vector<PerformanceVector> pop(a.begin(), a.begin() + 2000);
  Fronts fs, fp;
  const double ss = best_of(reps, [&] { fs = fast_nondominated_sort(pop, Exec::Serial); });
  const double sp = best_of(reps, [&] { fp = fast_nondominated_sort(pop, Exec::Parallel); });
  row("non-dominated sort n=2000", ss, sp, fs == fp);

  ExhaustiveResult xs, xp;
  const double xse = best_of(1, [&] { xs = exhaustive_pareto(ConfigSpace::full(), land, HardwareSpec{}, Exec::Serial); });
  const double xpe = best_of(1, [&] { xp = exhaustive_pareto(ConfigSpace::full(), land, HardwareSpec{}, Exec::Parallel); });
  row("exhaustive front", xse, xpe, xs.front.performances() == xp.front.performances());

  Rng rng(1);
  std::vector<EfficiencyConfig> cs;
  std::vector<PerformanceVector> ps;
  for (int i = 0; i < 300; ++i) {
    cs.push_back(sample_uniform(ConfigSpace::full(), rng));
    ps.push_back(land.evaluate(cs.back()));
  }
  const auto samples = make_samples(cs, ps, land.model(), land.task());
  BoostingParams bp;
  bp.n_estimators = 200;
  SurrogateEnsemble s1, s2;
  const double fs1 = best_of(1, [&] { s1 = fit_ensemble(samples, 5, bp, 1, Exec::Serial); });
  const double fp1 = best_of(1, [&] { s2 = fit_ensemble(samples, 5, bp, 1, Exec::Parallel); });
  row("fit ensemble E=5", fs1, fp1, s1 == s2);

  std::vector<FeatureVector> xs_feat;
  for (std::size_t i = 0; i < 5000; ++i) xs_feat.push_back(encode(all[i * 10], land.model(), land.task()));
  std::vector<ObjectivePrediction> pa, pb;
  const double ps1 = best_of(reps, [&] { pa = s1.predict_mean_var_batch(xs_feat, Exec::Serial); });
  const double pp1 = best_of(reps, [&] { pb = s1.predict_mean_var_batch(xs_feat, Exec::Parallel); });
  bool same = pa.size() == pb.size();
  for (std::size_t i = 0; same && i < pa.size(); ++i)
    for (std::size_t o = 0; o < 4; ++o) same = same && pa[i][o].mean == pb[i][o].mean && pa[i][o].var == pb[i][o].var;
  row("batch predict 5000 rows", ps1, pp1, same);
  return 0;
}
