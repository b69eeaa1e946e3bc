#include "clsqp/environments.hpp"
#include "clsqp/qp_data.hpp"
#include "clsqp/sensitivity_barrier.hpp"

#include <benchmark/benchmark.h>

#include <map>

namespace {

struct Fixture {
  clsqp::Environment env;
  clsqp::Iterate it;
  clsqp::QPData data;
  clsqp::OcpQpSolution qp;
};

const Fixture& fixture(const std::string& name, int case_index) {
  static std::map<std::string, Fixture> cache;
  const std::string key = name + std::to_string(case_index);
  auto found = cache.find(key);
  if (found != cache.end()) return found->second;
  Fixture f;
  f.env = clsqp::make_environment(name, case_index);
  f.it = clsqp::Iterate::from_controls(f.env.spec, f.env.u_init);
  f.data = clsqp::build_qp_data(f.env.spec, f.it, {});
  f.qp = clsqp::solve_ocp_qp(clsqp::to_ocp_qp(f.data), {});
  return cache.emplace(key, std::move(f)).first->second;
}

void BM_BuildQpData(benchmark::State& state, const char* env, bool parallel) {
  const Fixture& f = fixture(env, 1);
  clsqp::QpDataOptions opt;
  opt.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(clsqp::build_qp_data(f.env.spec, f.it, opt));
}

void BM_BarrierGains(benchmark::State& state, const char* env, bool parallel) {
  const Fixture& f = fixture(env, 1);
  clsqp::BarrierOptions opt;
  opt.gamma = f.env.options.gamma.at(0);
  opt.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(clsqp::barrier_gains(f.data, f.qp.x, f.qp.u, opt));
}

}  // namespace

BENCHMARK_CAPTURE(BM_BuildQpData, car_serial, "car", false);
BENCHMARK_CAPTURE(BM_BuildQpData, car_parallel, "car", true);
BENCHMARK_CAPTURE(BM_BuildQpData, quadpend_serial, "quadpend", false);
BENCHMARK_CAPTURE(BM_BuildQpData, quadpend_parallel, "quadpend", true);
BENCHMARK_CAPTURE(BM_BarrierGains, car_serial, "car", false);
BENCHMARK_CAPTURE(BM_BarrierGains, car_parallel, "car", true);
BENCHMARK_CAPTURE(BM_BarrierGains, quadpend_serial, "quadpend", false);
BENCHMARK_CAPTURE(BM_BarrierGains, quadpend_parallel, "quadpend", true);

BENCHMARK_MAIN();
