#pragma once

#include <cstdint>
#include <vector>

#include "lipo/types.hpp"

namespace lipo {

// Which rule produced a given step of a reference segment.
enum class Regime : std::uint8_t { kDelay, kBlend, kPath };

// A blended per-segment reference trajectory at the action rate.
//
// Rows [0, delay_end] replay the past trajectory bitwise (no blending while
// the inference delay is absorbed), rows (delay_end, blend_end] carry the
// convex combination of past and new, and rows after blend_end copy the new
// chunk bitwise.
struct ReferenceTrajectory {
  Eigen::MatrixXd samples;
  std::vector<Regime> regimes;   // one label per row
  int delay_end = 0;             // last index of the freeze window
  int blend_end = 0;             // last index of the blend window
  std::int64_t start_step = 0;   // global step of row 0

  Eigen::Index length() const { return samples.rows(); }
  Eigen::Index joints() const { return samples.cols(); }
};

// Linear blending weight: (step - delay_end) / (blend_end - delay_end).
// Defined for delay_end <= step <= blend_end; 0 at the delay boundary,
// 1 at the blend boundary. Throws ConfigError on a zero-length window.
double blend_weight(int step, int delay_end, int blend_end);

// Builds the reference segment for a newly arrived chunk.
//
// The segment spans the chunk: row i corresponds to global step
// new_chunk.start_step + i. The past trajectory supplies rows of the freeze
// window and the fading side of the blend. When the past tail ends before a
// required step, its last sample is held constant (a robot waiting for its
// first chunk holds position), so a one-row tail is always sufficient.
//
// Bitwise guarantees: rows [0, delay_end] equal the past values, rows
// [blend_end, end) equal the chunk values, and blending two equal inputs
// returns the chunk values unchanged.
//
// Throws DataError when the joint counts differ, the past tail is empty, or
// the past tail starts after the chunk (nothing to blend from).
ReferenceTrajectory build_reference(const Trajectory& past_tail, const Chunk& new_chunk,
                                    const TimingConfig& timing);

}  // namespace lipo
