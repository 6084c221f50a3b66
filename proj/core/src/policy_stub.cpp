#include "lipo/policy_stub.hpp"

#include <cmath>

namespace lipo {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Independent stream keyed by (seed, stream tag, chunk index).
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag, std::int64_t index) {
  std::uint64_t s = seed;
  std::uint64_t mixed = splitmix64(s) ^ (tag * 0xD6E8FEB86659FD93ull) ^
                        (static_cast<std::uint64_t>(index) * 0xA0761D6478BD642Full);
  return mixed;
}

constexpr std::uint64_t kOffsetTag = 1;
constexpr std::uint64_t kLatencyTag = 2;

}  // namespace

PolicyStub::PolicyStub(StubConfig config, TimingConfig timing)
    : config_(std::move(config)), timing_(timing) {
  if (config_.joints < 1) {
    throw ConfigError("stub joint count must be >= 1");
  }
  if (config_.latency.min_steps < 0 || config_.latency.max_steps < config_.latency.min_steps) {
    throw ConfigError("latency range must satisfy 0 <= min <= max");
  }

  offset_magnitude_ = config_.noise_mag;
  if (offset_magnitude_ == 0.0 && config_.family == StubFamily::kSteps) {
    offset_magnitude_ = 0.3;
  }
  if (offset_magnitude_ < 0.0) {
    throw ConfigError("offset magnitude must be >= 0");
  }

  std::uint64_t state = config_.seed ^ 0x5BF0'3635'DE4D'27CCull;
  harmonics_.resize(static_cast<std::size_t>(config_.joints));
  for (auto& joint : harmonics_) {
    for (std::size_t h = 0; h < joint.size(); ++h) {
      joint[h].amplitude = 0.45 / static_cast<double>(h + 1) * (0.5 + uniform01(state));
      joint[h].freq_hz = 0.05 + 0.35 * uniform01(state);
      joint[h].phase = 2.0 * M_PI * uniform01(state);
    }
  }
}

double PolicyStub::base_value(int joint, std::int64_t step) const {
  const double t = static_cast<double>(step) * timing_.action_dt();
  double value = 0.0;
  for (const auto& h : harmonics_[static_cast<std::size_t>(joint)]) {
    value += h.amplitude * std::sin(2.0 * M_PI * h.freq_hz * t + h.phase);
  }
  return value;
}

int PolicyStub::latency_steps(std::int64_t chunk_index) const {
  const auto& lat = config_.latency;
  if (lat.min_steps == lat.max_steps) {
    return lat.min_steps;
  }
  std::uint64_t state = stream_key(config_.seed, kLatencyTag, chunk_index);
  const int span = lat.max_steps - lat.min_steps + 1;
  const int draw = static_cast<int>(uniform01(state) * static_cast<double>(span));
  return lat.min_steps + std::min(draw, span - 1);
}

Chunk PolicyStub::predict(std::int64_t chunk_index, std::int64_t start_step,
                          std::int64_t issue_step) const {
  Chunk chunk;
  chunk.start_step = start_step;
  chunk.inference_issue_step = issue_step;
  chunk.arrival_step = issue_step + latency_steps(chunk_index);

  const int len = timing_.chunk_len_steps;
  const int joints = config_.joints;

  if (config_.family == StubFamily::kReplay) {
    if (chunk_index < 0 ||
        chunk_index >= static_cast<std::int64_t>(config_.replay.size())) {
      throw DataError("replay stream exhausted at chunk " + std::to_string(chunk_index));
    }
    const Chunk& src = config_.replay[static_cast<std::size_t>(chunk_index)];
    if (src.joints() != joints) {
      throw DataError("replay chunk joint count does not match the session");
    }
    if (src.length() != len) {
      throw DataError("replay chunk length does not match the configured chunk length");
    }
    chunk.samples = src.samples;
    return chunk;
  }

  Eigen::VectorXd offset = Eigen::VectorXd::Zero(joints);
  if (offset_magnitude_ > 0.0) {
    std::uint64_t state = stream_key(config_.seed, kOffsetTag, chunk_index);
    for (int j = 0; j < joints; ++j) {
      offset[j] = offset_magnitude_ * (2.0 * uniform01(state) - 1.0);
    }
  }

  chunk.samples.resize(len, joints);
  for (int i = 0; i < len; ++i) {
    for (int j = 0; j < joints; ++j) {
      chunk.samples(i, j) = base_value(j, start_step + i) + offset[j];
    }
  }
  return chunk;
}

}  // namespace lipo
