#include <benchmark/benchmark.h>

#include "stsexo/experiment.hpp"
#include "stsexo/riccati.hpp"
#include "stsexo/sim.hpp"

namespace {

using namespace stsexo;

const Experiment& Default() {
  static const Experiment e = BuildExperiment(RunConfig{});
  return e;
}

void BM_MassMatrix(benchmark::State& state) {
  const Experiment& e = Default();
  const Eigen::VectorXd q = e.reference.q.row(1500);
  for (auto _ : state) benchmark::DoNotOptimize(MassMatrix(*e.model, q));
}
BENCHMARK(BM_MassMatrix);

void BM_ForwardDynamics(benchmark::State& state) {
  const Experiment& e = Default();
  const Eigen::VectorXd q = e.reference.q.row(1500), qd = e.reference.qd.row(1500);
  const Eigen::VectorXd tau = Eigen::VectorXd::Constant(3, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(ForwardDynamics(*e.model, q, qd, tau));
}
BENCHMARK(BM_ForwardDynamics);

void BM_CoupledCare(benchmark::State& state) {
  const Experiment& e = Default();
  const LinearModel lin = Linearize(*e.model, e.operating_point);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(6, 6);
  Q.diagonal() << 120, 280, 200, 6, 14, 10;
  const Eigen::MatrixXd R = Eigen::Vector3d(0.15, 0.08, 0.10).asDiagonal();
  const Eigen::MatrixXd B = lin.B * e.gain_scale.asDiagonal();
  for (auto _ : state) benchmark::DoNotOptimize(SolveCare(lin.A, B, Q, R));
}
BENCHMARK(BM_CoupledCare);

void BM_ControllerStep(benchmark::State& state) {
  const Experiment& e = Default();
  Controller c(e.hybrid);
  const JointState ref = e.reference.StateAt(1500);
  JointState meas = ref;
  meas.q.array() += 0.01;
  const Eigen::VectorXd qdd = e.reference.qdd.row(1500);
  const Eigen::VectorXd limit = e.model->torque_limit();
  for (auto _ : state) benchmark::DoNotOptimize(c.Compute(meas, ref, qdd, 1e-3, limit));
}
BENCHMARK(BM_ControllerStep);

void BM_Simulate(benchmark::State& state) {
  const Experiment& e = Default();
  const ControllerSpec spec = e.Controller(state.range(0) == 0 ? "pid" : state.range(0) == 1 ? "lqr" : "hybrid");
  for (auto _ : state) benchmark::DoNotOptimize(Simulate(*e.model, spec, e.reference, e.sim));
}
BENCHMARK(BM_Simulate)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Comparison(benchmark::State& state) {
  const Experiment& e = Default();
  const auto specs = e.Controllers();
  for (auto _ : state) benchmark::DoNotOptimize(RunComparison(*e.model, specs, e.reference, e.sim));
}
BENCHMARK(BM_Comparison)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
