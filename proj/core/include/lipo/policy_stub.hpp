#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lipo/types.hpp"

namespace lipo {

// Chunk families the stub can emit in place of a learned policy:
// a smooth sum-of-sinusoids stream, the same stream with per-chunk constant
// offsets (step discontinuities at every chunk boundary), or chunks replayed
// from a parsed file.
enum class StubFamily : std::uint8_t { kSinusoid, kSteps, kReplay };

// Inference latency in action steps: fixed when min == max, otherwise drawn
// uniformly per chunk from [min, max].
struct LatencyModel {
  int min_steps = 5;
  int max_steps = 5;

  int worst_case() const { return max_steps; }
};

struct StubConfig {
  StubFamily family = StubFamily::kSinusoid;
  int joints = 6;
  // Per-chunk offset magnitude, radians. Zero selects the family default
  // (0 for kSinusoid, 0.3 for kSteps).
  double noise_mag = 0.0;
  std::uint64_t seed = 0;
  LatencyModel latency;
  std::vector<Chunk> replay;  // consumed in order by kReplay
};

// Deterministic, seedable chunk source. Chunk contents and latencies depend
// only on (seed, config, chunk index), never on call order, so concurrent
// producers see the identical stream.
class PolicyStub {
 public:
  PolicyStub(StubConfig config, TimingConfig timing);

  Chunk predict(std::int64_t chunk_index, std::int64_t start_step,
                std::int64_t issue_step) const;
  int latency_steps(std::int64_t chunk_index) const;
  int worst_case_latency() const { return config_.latency.worst_case(); }
  int joints() const { return config_.joints; }

  // The smooth underlying signal before per-chunk offsets.
  double base_value(int joint, std::int64_t step) const;

 private:
  struct Harmonic {
    double amplitude;
    double freq_hz;
    double phase;
  };

  StubConfig config_;
  TimingConfig timing_;
  double offset_magnitude_ = 0.0;
  std::vector<std::array<Harmonic, 3>> harmonics_;  // per joint
};

}  // namespace lipo
