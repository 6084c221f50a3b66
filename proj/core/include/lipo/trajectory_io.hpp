#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lipo/types.hpp"

namespace lipo {

// Shortest round-trip decimal representation.
std::string format_double(double value);

// Writes via a temporary file in the same directory plus a rename, so
// readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// Trajectory file format (comma-separated text, UTF-8):
//
//   # traj v1 rate_hz=30 joints=2 names=shoulder,elbow
//   # chunk issue=-5 arrival=0
//   0,0.1,0.2
//   1,0.11,0.21
//
// The first line is the header: format version, sample rate, joint count and
// joint names. '#'-prefixed lines are comments; '# chunk' lines are explicit
// chunk-boundary markers carrying optional issue/arrival steps (both default
// to the chunk's first row step). Rows are a step index followed by one
// value per joint. Steps are contiguous within a chunk; in plain files (no
// markers) they are contiguous throughout. Across markers the step sequence
// may rewind, which is how overlapping chunk predictions are represented.

struct TrajectoryFileContent {
  Trajectory trajectory;
  std::vector<std::string> joint_names;
};

struct ChunkedFileContent {
  std::vector<Chunk> chunks;
  double rate_hz = 0.0;
  std::vector<std::string> joint_names;
};

void write_trajectory_file(const std::filesystem::path& path, const Trajectory& trajectory,
                           const std::vector<std::string>& joint_names = {});

void write_chunked_file(const std::filesystem::path& path, const std::vector<Chunk>& chunks,
                        double rate_hz, const std::vector<std::string>& joint_names = {});

// Plain form: rejects chunk markers and non-contiguous steps.
// Errors carry 1-based line numbers.
TrajectoryFileContent read_trajectory_file(const std::filesystem::path& path);

// Chunked form: a file without markers parses as a single chunk.
ChunkedFileContent read_chunked_file(const std::filesystem::path& path);

}  // namespace lipo
