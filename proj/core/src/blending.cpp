#include "lipo/blending.hpp"

#include <algorithm>

namespace lipo {

double blend_weight(int step, int delay_end, int blend_end) {
  if (blend_end <= delay_end) {
    throw ConfigError("blend window must have positive length");
  }
  return static_cast<double>(step - delay_end) / static_cast<double>(blend_end - delay_end);
}

ReferenceTrajectory build_reference(const Trajectory& past_tail, const Chunk& new_chunk,
                                    const TimingConfig& timing) {
  if (new_chunk.length() < 1) {
    throw DataError("new chunk is empty");
  }
  if (past_tail.length() < 1) {
    throw DataError("insufficient past tail: no samples to blend from");
  }
  if (past_tail.joints() != new_chunk.joints()) {
    throw DataError("joint count mismatch between past tail and new chunk");
  }
  if (past_tail.start_step > new_chunk.start_step) {
    throw DataError("misaligned step indices: past tail starts after the new chunk");
  }

  const auto segment_len = static_cast<int>(new_chunk.length());
  const int delay_end = timing.delay_steps;
  const int blend_end = timing.blend_end();
  if (delay_end >= segment_len) {
    throw DataError("delay window does not fit inside the segment");
  }
  if (blend_end > segment_len) {
    throw DataError("blend window does not fit inside the segment");
  }

  const Eigen::Index joints = new_chunk.joints();
  const Eigen::Index past_rows = past_tail.length();

  ReferenceTrajectory ref;
  ref.samples.resize(segment_len, joints);
  ref.regimes.resize(static_cast<std::size_t>(segment_len));
  ref.delay_end = delay_end;
  ref.blend_end = blend_end;
  ref.start_step = new_chunk.start_step;

  // Row of the past tail covering global step g, holding the last sample
  // once the tail runs out.
  const auto past_row = [&](std::int64_t g) {
    const std::int64_t offset = g - past_tail.start_step;
    return past_tail.samples.row(std::min<std::int64_t>(offset, past_rows - 1));
  };

  for (int i = 0; i < segment_len; ++i) {
    const std::int64_t g = new_chunk.start_step + i;
    if (i <= delay_end) {
      ref.samples.row(i) = past_row(g);
      ref.regimes[static_cast<std::size_t>(i)] = Regime::kDelay;
    } else if (i <= blend_end) {
      ref.regimes[static_cast<std::size_t>(i)] = Regime::kBlend;
      if (i == blend_end) {
        ref.samples.row(i) = new_chunk.samples.row(i);
      } else {
        // p + alpha * (n - p): agrees with the convex combination but keeps
        // p bitwise when n == p and stays inside [min(p,n), max(p,n)]
        // under rounding.
        const double alpha = blend_weight(i, delay_end, blend_end);
        ref.samples.row(i) =
            past_row(g) + alpha * (new_chunk.samples.row(i) - past_row(g));
      }
    } else {
      ref.samples.row(i) = new_chunk.samples.row(i);
      ref.regimes[static_cast<std::size_t>(i)] = Regime::kPath;
    }
  }
  return ref;
}

}  // namespace lipo
