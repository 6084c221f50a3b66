#include "lipo/trajectory_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace lipo {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = text.find(sep, begin);
    if (end == std::string_view::npos) {
      parts.push_back(text.substr(begin));
      break;
    }
    parts.push_back(text.substr(begin, end - begin));
    begin = end + 1;
  }
  return parts;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& message) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + message);
}

double parse_double(std::string_view token, const std::filesystem::path& path,
                    std::size_t line) {
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || token.empty()) {
    fail(path, line, "malformed number '" + std::string(token) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view token, const std::filesystem::path& path,
                       std::size_t line) {
  std::int64_t value = 0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || token.empty()) {
    fail(path, line, "malformed integer '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> tokens_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') {
      ++i;
    }
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') {
      ++j;
    }
    if (j > i) {
      out.push_back(text.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

struct Block {
  std::int64_t issue = 0;
  std::int64_t arrival = 0;
  bool has_issue = false;
  bool has_arrival = false;
  bool explicit_marker = false;
  std::vector<std::int64_t> steps;
  std::vector<std::size_t> row_lines;
  std::vector<std::vector<double>> rows;
};

struct ParsedFile {
  double rate_hz = 0.0;
  Eigen::Index joints = 0;
  std::vector<std::string> names;
  std::vector<Block> blocks;
};

ParsedFile parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  ParsedFile parsed;
  bool header_seen = false;
  bool rate_seen = false;
  bool joints_seen = false;

  std::size_t line_no = 0;
  for (std::string_view rest = content; !rest.empty() || line_no == 0;) {
    if (rest.empty()) {
      break;
    }
    ++line_no;
    const std::size_t eol = rest.find('\n');
    std::string_view line = eol == std::string_view::npos ? rest : rest.substr(0, eol);
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty()) {
      continue;
    }

    if (line.front() == '#') {
      const auto toks = tokens_of(line.substr(1));
      if (!header_seen) {
        if (toks.size() < 2 || toks[0] != "traj" || toks[1] != "v1") {
          fail(path, line_no, "expected header '# traj v1 rate_hz=... joints=...'");
        }
        for (std::size_t t = 2; t < toks.size(); ++t) {
          const auto kv = split(toks[t], '=');
          if (kv.size() != 2) {
            fail(path, line_no, "malformed header field '" + std::string(toks[t]) + "'");
          }
          if (kv[0] == "rate_hz") {
            parsed.rate_hz = parse_double(kv[1], path, line_no);
            rate_seen = true;
          } else if (kv[0] == "joints") {
            parsed.joints = parse_int(kv[1], path, line_no);
            joints_seen = true;
          } else if (kv[0] == "names") {
            for (const auto name : split(kv[1], ',')) {
              parsed.names.emplace_back(name);
            }
          } else {
            fail(path, line_no, "unknown header field '" + std::string(kv[0]) + "'");
          }
        }
        if (!rate_seen || !joints_seen) {
          fail(path, line_no, "header must carry rate_hz and joints");
        }
        if (!(parsed.rate_hz > 0.0)) {
          fail(path, line_no, "rate_hz must be positive");
        }
        if (parsed.joints < 1) {
          fail(path, line_no, "joints must be >= 1");
        }
        if (!parsed.names.empty() &&
            parsed.names.size() != static_cast<std::size_t>(parsed.joints)) {
          fail(path, line_no, "names count does not match joints");
        }
        header_seen = true;
        continue;
      }
      if (!toks.empty() && toks[0] == "chunk") {
        Block block;
        block.explicit_marker = true;
        for (std::size_t t = 1; t < toks.size(); ++t) {
          const auto kv = split(toks[t], '=');
          if (kv.size() != 2) {
            fail(path, line_no, "malformed chunk field '" + std::string(toks[t]) + "'");
          }
          if (kv[0] == "issue") {
            block.issue = parse_int(kv[1], path, line_no);
            block.has_issue = true;
          } else if (kv[0] == "arrival") {
            block.arrival = parse_int(kv[1], path, line_no);
            block.has_arrival = true;
          } else {
            fail(path, line_no, "unknown chunk field '" + std::string(kv[0]) + "'");
          }
        }
        parsed.blocks.push_back(std::move(block));
      }
      continue;  // plain comment
    }

    if (!header_seen) {
      fail(path, line_no, "data before the '# traj v1' header");
    }
    const auto fields = split(line, ',');
    if (fields.size() != static_cast<std::size_t>(parsed.joints) + 1) {
      fail(path, line_no,
           "expected " + std::to_string(parsed.joints + 1) + " fields, got " +
               std::to_string(fields.size()));
    }
    if (parsed.blocks.empty()) {
      parsed.blocks.emplace_back();  // implicit single chunk
    }
    Block& block = parsed.blocks.back();
    block.steps.push_back(parse_int(fields[0], path, line_no));
    block.row_lines.push_back(line_no);
    std::vector<double> row(static_cast<std::size_t>(parsed.joints));
    for (Eigen::Index j = 0; j < parsed.joints; ++j) {
      row[static_cast<std::size_t>(j)] =
          parse_double(fields[static_cast<std::size_t>(j) + 1], path, line_no);
    }
    block.rows.push_back(std::move(row));
  }

  if (!header_seen) {
    throw DataError(path.string() + ": missing '# traj v1' header");
  }
  if (parsed.blocks.empty()) {
    throw DataError(path.string() + ": no data rows");
  }
  for (const Block& block : parsed.blocks) {
    if (block.rows.empty()) {
      throw DataError(path.string() + ": chunk marker without data rows");
    }
    for (std::size_t i = 1; i < block.steps.size(); ++i) {
      if (block.steps[i] != block.steps[i - 1] + 1) {
        fail(path, block.row_lines[i], "step indices must increase by 1 within a chunk");
      }
    }
  }
  if (parsed.names.empty()) {
    for (Eigen::Index j = 0; j < parsed.joints; ++j) {
      parsed.names.push_back("j" + std::to_string(j + 1));
    }
  }
  return parsed;
}

Eigen::MatrixXd rows_to_matrix(const Block& block, Eigen::Index joints) {
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(block.rows.size()), joints);
  for (std::size_t i = 0; i < block.rows.size(); ++i) {
    for (Eigen::Index j = 0; j < joints; ++j) {
      samples(static_cast<Eigen::Index>(i), j) = block.rows[i][static_cast<std::size_t>(j)];
    }
  }
  return samples;
}

std::string header_line(double rate_hz, Eigen::Index joints,
                        const std::vector<std::string>& joint_names) {
  std::vector<std::string> names = joint_names;
  if (names.empty()) {
    for (Eigen::Index j = 0; j < joints; ++j) {
      names.push_back("j" + std::to_string(j + 1));
    }
  }
  if (names.size() != static_cast<std::size_t>(joints)) {
    throw DataError("joint name count does not match the joint count");
  }
  std::string line = "# traj v1 rate_hz=" + format_double(rate_hz) +
                     " joints=" + std::to_string(joints) + " names=";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty() || names[i].find_first_of(", \t\n") != std::string::npos) {
      throw DataError("joint name '" + names[i] + "' contains separators");
    }
    if (i > 0) {
      line += ",";
    }
    line += names[i];
  }
  return line + "\n";
}

void append_rows(std::string& out, const Eigen::MatrixXd& samples, std::int64_t start_step) {
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    out += std::to_string(start_step + i);
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      out += ",";
      out += format_double(samples(i, j));
    }
    out += "\n";
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto res = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, res.ptr);
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError("cannot open " + tmp.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw DataError("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void write_trajectory_file(const std::filesystem::path& path, const Trajectory& trajectory,
                           const std::vector<std::string>& joint_names) {
  validate(trajectory);
  std::string out = header_line(trajectory.rate_hz, trajectory.joints(), joint_names);
  append_rows(out, trajectory.samples, trajectory.start_step);
  atomic_write_file(path, out);
}

void write_chunked_file(const std::filesystem::path& path, const std::vector<Chunk>& chunks,
                        double rate_hz, const std::vector<std::string>& joint_names) {
  if (chunks.empty()) {
    throw DataError("no chunks to write");
  }
  if (!(rate_hz > 0.0)) {
    throw DataError("rate must be positive");
  }
  std::string out = header_line(rate_hz, chunks.front().joints(), joint_names);
  for (const Chunk& chunk : chunks) {
    validate(chunk);
    out += "# chunk issue=" + std::to_string(chunk.inference_issue_step) +
           " arrival=" + std::to_string(chunk.arrival_step) + "\n";
    append_rows(out, chunk.samples, chunk.start_step);
  }
  atomic_write_file(path, out);
}

TrajectoryFileContent read_trajectory_file(const std::filesystem::path& path) {
  const ParsedFile parsed = parse_file(path);
  if (parsed.blocks.size() != 1 || parsed.blocks.front().explicit_marker) {
    throw DataError(path.string() +
                    ": contains chunk markers; expected a plain trajectory");
  }
  TrajectoryFileContent content;
  content.trajectory.samples = rows_to_matrix(parsed.blocks.front(), parsed.joints);
  content.trajectory.rate_hz = parsed.rate_hz;
  content.trajectory.start_step = parsed.blocks.front().steps.front();
  content.joint_names = parsed.names;
  validate(content.trajectory);
  return content;
}

ChunkedFileContent read_chunked_file(const std::filesystem::path& path) {
  const ParsedFile parsed = parse_file(path);
  ChunkedFileContent content;
  content.rate_hz = parsed.rate_hz;
  content.joint_names = parsed.names;
  content.chunks.reserve(parsed.blocks.size());
  for (const Block& block : parsed.blocks) {
    Chunk chunk;
    chunk.samples = rows_to_matrix(block, parsed.joints);
    chunk.start_step = block.steps.front();
    chunk.inference_issue_step = block.has_issue ? block.issue : chunk.start_step;
    chunk.arrival_step = block.has_arrival ? block.arrival : chunk.start_step;
    validate(chunk);
    content.chunks.push_back(std::move(chunk));
  }
  return content;
}

}  // namespace lipo
