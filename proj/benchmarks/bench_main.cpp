#include <benchmark/benchmark.h>

#include "lipo/blending.hpp"
#include "lipo/jerk_qp.hpp"
#include "lipo/kinematics.hpp"
#include "lipo/policy_stub.hpp"
#include "lipo/quintic.hpp"
#include "lipo/scheduler.hpp"

namespace {

using namespace lipo;

// The per-chunk workload of the default regime: a 6-joint 50-step segment.
struct SegmentFixture {
  TimingConfig timing;
  BoundsConfig bounds;
  Trajectory past;
  Chunk chunk;

  SegmentFixture() {
    StubConfig cfg;
    cfg.seed = 42;
    cfg.joints = 6;
    cfg.family = StubFamily::kSteps;
    const PolicyStub stub(cfg, timing);
    const Chunk first = stub.predict(0, 0, -5);
    chunk = stub.predict(1, 35, 15);
    past.samples = first.samples.bottomRows(15);
    past.rate_hz = timing.action_rate_hz;
    past.start_step = 35;
  }
};

void BM_BuildReference(benchmark::State& state) {
  const SegmentFixture fx;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_reference(fx.past, fx.chunk, fx.timing));
  }
}
BENCHMARK(BM_BuildReference);

void BM_SolveSingleJoint(benchmark::State& state) {
  const SegmentFixture fx;
  const ReferenceTrajectory ref = build_reference(fx.past, fx.chunk, fx.timing);
  const auto problems = build_problems(ref, fx.bounds, fx.timing.action_dt());
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(problems.front()));
  }
}
BENCHMARK(BM_SolveSingleJoint);

// blend + build + 6 decoupled QP solves: the latency that must fit inside
// one 33 ms inference period
void BM_OptimizeSixJointSegment(benchmark::State& state) {
  const SegmentFixture fx;
  for (auto _ : state) {
    const ReferenceTrajectory ref = build_reference(fx.past, fx.chunk, fx.timing);
    const auto problems = build_problems(ref, fx.bounds, fx.timing.action_dt());
    for (const auto& p : problems) {
      benchmark::DoNotOptimize(solve(p));
    }
  }
}
BENCHMARK(BM_OptimizeSixJointSegment);

void BM_QuinticUpsample(benchmark::State& state) {
  const SegmentFixture fx;
  Trajectory action;
  action.samples = fx.chunk.samples;
  action.rate_hz = fx.timing.action_rate_hz;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        upsample_for_execution(action, fx.timing.control_rate_hz, true));
  }
}
BENCHMARK(BM_QuinticUpsample);

void BM_JacobianVertexNorm(benchmark::State& state) {
  const KinematicChain chain = default_six_dof_chain();
  JointVector q(6);
  q << 0.3, -0.7, 1.1, 0.2, -0.4, 0.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(induced_norm_inf_to_2(jacobian(chain, q)));
  }
}
BENCHMARK(BM_JacobianVertexNorm);

void BM_SessionChunk(benchmark::State& state) {
  SessionConfig cfg;
  cfg.mode = ExecutionMode::kLiPoQuintic;
  cfg.chunks = 20;
  cfg.stub.seed = 7;
  cfg.stub.joints = 6;
  cfg.stub.family = StubFamily::kSteps;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_session(cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.chunks);
}
BENCHMARK(BM_SessionChunk);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
