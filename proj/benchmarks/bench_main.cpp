#include <benchmark/benchmark.h>

#include "wavefront/perturbation.hpp"

using namespace wavefront;

namespace {

std::shared_ptr<const PolynomialPotential> fish() {
    std::vector<Monomial> m{{{2}, 0.5}, {{3}, -1.0 / 3.0}};
    return std::make_shared<PolynomialPotential>(1, std::move(m));
}

std::shared_ptr<const PolynomialPotential> nagumo() {
    const double a = 0.25;
    std::vector<Monomial> m{{{4}, 0.25}, {{3}, -(1.0 + a) / 3.0}, {{2}, a / 2.0}};
    return std::make_shared<PolynomialPotential>(1, std::move(m));
}

void BM_integrate_pulse_orbit(benchmark::State& state) {
    auto model = fish();
    IntegrationOptions opt;
    opt.tol = std::pow(10.0, -static_cast<double>(state.range(0)));
    const PhasePoint u0{Vec::Constant(1, 1.5), Vec::Zero(1)};
    for (auto _ : state) {
        IntegrationResult res = integrate(*model, 0.0, u0, 0.0, 20.0, opt);
        benchmark::DoNotOptimize(res.trajectory.curve.samples().size());
    }
}
BENCHMARK(BM_integrate_pulse_orbit)->Arg(8)->Arg(10)->Arg(12);

void BM_find_critical_points_2d(benchmark::State& state) {
    std::vector<Monomial> m{{{4, 0}, 0.25}, {{2, 0}, -0.5}, {{0, 0}, 0.25}, {{0, 2}, 0.5}};
    auto model = std::make_shared<PolynomialPotential>(2, std::move(m));
    SearchBox box{Vec::Constant(2, -2.0), Vec::Constant(2, 2.0)};
    for (auto _ : state) {
        CriticalPointSearch search =
            find_critical_points(*model, box, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(search.points.size());
    }
}
BENCHMARK(BM_find_critical_points_2d)->Arg(7)->Arg(15);

void BM_refined_manifold_sample(benchmark::State& state) {
    auto model = fish();
    CriticalPoint e = classify_critical_point(*model, Vec::Zero(1));
    EquilibriumSpectrum sp = spectrum_at(*model, e, 0.0);
    LocalManifold wu = LocalManifold::build(model, sp, ManifoldKind::unstable, {});
    const Vec b = Vec::Constant(1, 1.0);
    for (auto _ : state) {
        PhasePoint p = wu.sample_boundary(b);
        benchmark::DoNotOptimize(p.u(0));
    }
}
BENCHMARK(BM_refined_manifold_sample);

void BM_solve_front_nagumo(benchmark::State& state) {
    FrontProblem problem;
    problem.model = nagumo();
    problem.departure = classify_critical_point(*problem.model, Vec::Constant(1, 1.0));
    problem.arrival = classify_critical_point(*problem.model, Vec::Zero(1));
    problem.c_min = 0.05;
    problem.c_max = 1.0;
    for (auto _ : state) {
        ConnectionSolution sol = solve_front(problem);
        benchmark::DoNotOptimize(sol.c);
    }
}
BENCHMARK(BM_solve_front_nagumo)->Unit(benchmark::kMillisecond);

void BM_solve_symmetric_pulse(benchmark::State& state) {
    auto model = fish();
    CriticalPoint e = classify_critical_point(*model, Vec::Zero(1));
    for (auto _ : state) {
        ConnectionSolution sol = solve_symmetric_pulse(model, e);
        benchmark::DoNotOptimize(sol.turning_time);
    }
}
BENCHMARK(BM_solve_symmetric_pulse)->Unit(benchmark::kMillisecond);

void BM_transversality_front(benchmark::State& state) {
    FrontProblem problem;
    problem.model = nagumo();
    problem.departure = classify_critical_point(*problem.model, Vec::Constant(1, 1.0));
    problem.arrival = classify_critical_point(*problem.model, Vec::Zero(1));
    problem.c_min = 0.05;
    problem.c_max = 1.0;
    ConnectionSolution sol = solve_front(problem);
    for (auto _ : state) {
        TransversalityReport rep = transversality_front(problem, sol);
        benchmark::DoNotOptimize(rep.margin);
    }
}
BENCHMARK(BM_transversality_front)->Unit(benchmark::kMillisecond);

void BM_melnikov_sensitivity(benchmark::State& state) {
    FrontProblem problem;
    problem.model = nagumo();
    problem.departure = classify_critical_point(*problem.model, Vec::Constant(1, 1.0));
    problem.arrival = classify_critical_point(*problem.model, Vec::Zero(1));
    problem.c_min = 0.05;
    problem.c_max = 1.0;
    ConnectionSolution sol = solve_front(problem);
    AdjointSolution adj =
        adjoint_integrate(*problem.model, sol.trajectory, Vec::Constant(1, 0.5),
                          Vec::Constant(1, 1.0), sol.flight_time, 0.0);
    auto bump = case1_bump(Vec::Constant(1, 0.5), 0.2, Vec::Constant(1, 1.0));
    for (auto _ : state) {
        const double s =
            melnikov_sensitivity(*bump, sol.trajectory, adj, 0.0, sol.flight_time);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_melnikov_sensitivity);

}  // namespace

BENCHMARK_MAIN();
