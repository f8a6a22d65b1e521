#include <random>

#include <benchmark/benchmark.h>

#include "shellvi/assembly.hpp"
#include "shellvi/config.hpp"
#include "shellvi/geometry.hpp"
#include "shellvi/vi_solver.hpp"

namespace {

using namespace shellvi;

const Rect kCylinder{0.0, 2.0, 0.1, 3.041592653589793};

Chart cylinder() {
  ChartOptions o;
  o.swap = true;
  return builtin_chart("cylinder", kCylinder, EdgeSet::parse("bottom,right,top,left"), o);
}

ForceField vertical_load(double f33) {
  ForceField f;
  f.F = [f33](const Vec2&, double) {
    Mat3 F = Mat3::Zero();
    F(2, 2) = f33;
    return F;
  };
  return f;
}

void BM_EvalFrame(benchmark::State& state) {
  const Chart c = builtin_chart("hyperboloid", Rect{0.1, 3.0, -2.0, 2.0}, EdgeSet{Edge::Bottom});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u1(0.2, 2.9), u2(-1.9, 1.9);
  for (auto _ : state) benchmark::DoNotOptimize(eval_frame(c, Vec2(u1(rng), u2(rng))));
}
BENCHMARK(BM_EvalFrame);

void BM_Assemble3DStiffness(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Chart c = cylinder();
  const Mesh3D m = build_mesh3d(build_mesh2d(kCylinder, n, n, c.clamped_edges()), 4);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_3d_stiffness(m, c, Lame{1, 1}, 0.05));
  state.counters["dofs"] = 3.0 * m.num_nodes();
}
BENCHMARK(BM_Assemble3DStiffness)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SolveMembraneVI(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Chart c = cylinder();
  const AssembledSystem s = assemble_membrane_system(build_mesh2d(kCylinder, n, n, c.clamped_edges()), c, Lame{1, 1},
                                                     vertical_load(6.25), HalfSpace(Vec3(0, 0, 1)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_vi(s.qp));
}
BENCHMARK(BM_SolveMembraneVI)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Solve3DVI(benchmark::State& state) {
  const Chart c = cylinder();
  const Mesh3D m = build_mesh3d(build_mesh2d(kCylinder, 16, 16, c.clamped_edges()), 4);
  const AssembledSystem s =
      assemble_3d_system(m, c, Lame{1, 1}, static_cast<double>(state.range(0)) / 1000.0, vertical_load(6.25),
                         HalfSpace(Vec3(0, 0, 1)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_vi(s.qp));
}
BENCHMARK(BM_Solve3DVI)->Arg(200)->Arg(25)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
