#include "lipo/types.hpp"

#include <cmath>

namespace lipo {

double steps_to_seconds(std::int64_t steps, double rate_hz) {
  if (!(rate_hz > 0.0)) {
    throw ConfigError("rate_hz must be positive, got " + std::to_string(rate_hz));
  }
  return static_cast<double>(steps) / rate_hz;
}

void validate_config(const TimingConfig& timing, const BoundsConfig& bounds) {
  if (timing.chunk_len_steps < 1) {
    throw ConfigError("chunk length must be >= 1 step");
  }
  if (timing.delay_steps < 0) {
    throw ConfigError("delay window must be >= 0 steps");
  }
  if (timing.blend_steps < 1) {
    throw ConfigError("blend window must be >= 1");
  }
  if (timing.execute_horizon_steps < 1 ||
      timing.execute_horizon_steps > timing.chunk_len_steps) {
    throw ConfigError("execute horizon must be in [1, chunk length]");
  }
  if (timing.delay_steps + timing.blend_steps > timing.overlap_steps()) {
    throw ConfigError(
        "delay + blend windows exceed the chunk overlap "
        "(chunk length - execute horizon)");
  }
  if (!(timing.action_rate_hz > 0.0)) {
    throw ConfigError("action rate must be positive");
  }
  if (!(timing.control_rate_hz >= timing.action_rate_hz)) {
    throw ConfigError("control rate must be >= action rate");
  }
  if (!std::isfinite(timing.action_rate_hz) || !std::isfinite(timing.control_rate_hz)) {
    throw ConfigError("rates must be finite");
  }
  if (!(bounds.eps_path >= 0.0)) {
    throw ConfigError("path bound must be >= 0");
  }
  if (!(bounds.eps_blend >= bounds.eps_path)) {
    throw ConfigError("blend bound must be >= path bound");
  }
  if (!std::isfinite(bounds.eps_blend) || !std::isfinite(bounds.eps_path)) {
    throw ConfigError("perturbation bounds must be finite");
  }
}

void validate(const Chunk& chunk) {
  if (chunk.length() < 1) {
    throw DataError("chunk must contain at least one sample");
  }
  if (chunk.joints() < 1) {
    throw DataError("chunk must have at least one joint");
  }
  if (!chunk.samples.allFinite()) {
    throw DataError("chunk samples must be finite");
  }
  if (chunk.arrival_step < chunk.inference_issue_step) {
    throw DataError("chunk arrival precedes its inference issue step");
  }
}

void validate(const Trajectory& trajectory) {
  if (trajectory.length() < 1) {
    throw DataError("trajectory must contain at least one sample");
  }
  if (trajectory.joints() < 1) {
    throw DataError("trajectory must have at least one joint");
  }
  if (!trajectory.samples.allFinite()) {
    throw DataError("trajectory samples must be finite");
  }
  if (!(trajectory.rate_hz > 0.0)) {
    throw DataError("trajectory rate must be positive");
  }
}

}  // namespace lipo
