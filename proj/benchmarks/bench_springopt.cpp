#include <benchmark/benchmark.h>

#include <springopt/analysis.hpp>
#include <springopt/oracle.hpp>

using namespace springopt;

namespace {

Task cubic_task(int n) {
    const auto osc = generate_cubic_oscillation(CubicSpringSystem{}, n);
    return make_task(osc.trajectory, LoadModel::inertial(0.125), MotorParams::ilm85x26());
}

void BM_Operators(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_operators(n, 1.0 / n));
}
BENCHMARK(BM_Operators)->Arg(501)->Arg(2001)->Arg(8001);

void BM_MatrixFreeDifference(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Vector x = Vector::LinSpaced(n, 0.0, 1.0).array().sin();
    for (auto _ : state) benchmark::DoNotOptimize(periodic_second_difference(x, 1.0 / n));
}
BENCHMARK(BM_MatrixFreeDifference)->Arg(501)->Arg(8001);

void BM_CubicOscillation(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(generate_cubic_oscillation(CubicSpringSystem{}, 501));
}
BENCHMARK(BM_CubicOscillation)->Unit(benchmark::kMillisecond);

void BM_PlantedSolve(benchmark::State& state) {
    const auto inst = oracle::plant_instance(static_cast<int>(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(solve_qcqp(inst.problem));
}
BENCHMARK(BM_PlantedSolve)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

// theta = 1: energy only. theta = 0.5: adds one surrogate power row per sample.
void BM_Design(benchmark::State& state) {
    const Task task = cubic_task(static_cast<int>(state.range(0)));
    DesignOptions opt;
    opt.weights.theta = state.range(1) / 100.0;
    opt.build_profile = false;
    for (auto _ : state) benchmark::DoNotOptimize(design_spring(task, opt));
}
BENCHMARK(BM_Design)
    ->Args({101, 100})
    ->Args({501, 100})
    ->Args({101, 50})
    ->Args({501, 50})
    ->Unit(benchmark::kMillisecond);

void BM_LinearBaseline(benchmark::State& state) {
    const Task task = cubic_task(501);
    LinearBaselineOptions opt;
    opt.objective = LinearObjective::energy;
    for (auto _ : state) benchmark::DoNotOptimize(linear_spring_baseline(task, opt));
}
BENCHMARK(BM_LinearBaseline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
