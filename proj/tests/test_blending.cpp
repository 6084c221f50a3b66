#include <doctest.h>

#include <algorithm>
#include <random>

#include "lipo/blending.hpp"

using namespace lipo;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (static_cast<double>(rng() >> 11) * 0x1.0p-53) * (hi - lo);
}

Trajectory constant_past(double value, Eigen::Index rows, std::int64_t start) {
  Trajectory t;
  t.samples = Eigen::MatrixXd::Constant(rows, 1, value);
  t.rate_hz = 30.0;
  t.start_step = start;
  return t;
}

Chunk constant_chunk(double value, Eigen::Index rows, std::int64_t start) {
  Chunk c;
  c.samples = Eigen::MatrixXd::Constant(rows, 1, value);
  c.start_step = start;
  c.inference_issue_step = start;
  c.arrival_step = start;
  return c;
}

TimingConfig windows(int delay, int blend) {
  TimingConfig t;
  t.delay_steps = delay;
  t.blend_steps = blend;
  return t;
}

}  // namespace

TEST_CASE("blend_weight endpoints and midpoint") {
  CHECK(blend_weight(10, 5, 15) == 0.5);
  CHECK(blend_weight(5, 5, 15) == 0.0);
  CHECK(blend_weight(15, 5, 15) == 1.0);
  CHECK_THROWS_AS(blend_weight(5, 5, 5), ConfigError);
  CHECK_THROWS_AS(blend_weight(5, 7, 6), ConfigError);
}

TEST_CASE("two-constant fixture follows the piecewise closed form") {
  const auto past = constant_past(1.0, 20, 0);
  const auto chunk = constant_chunk(0.0, 50, 0);
  const auto ref = build_reference(past, chunk, windows(5, 10));

  REQUIRE(ref.length() == 50);
  CHECK(ref.delay_end == 5);
  CHECK(ref.blend_end == 15);
  for (int i = 0; i < 50; ++i) {
    double expected;
    if (i <= 5) {
      expected = 1.0;
    } else if (i <= 15) {
      const double alpha = blend_weight(i, 5, 15);
      expected = (1.0 - alpha) * 1.0 + alpha * 0.0;
    } else {
      expected = 0.0;
    }
    CHECK(std::abs(ref.samples(i, 0) - expected) <= 1e-12);
  }
  CHECK(ref.samples(10, 0) == 0.5);  // alpha = 1/2 exactly
  CHECK(ref.samples(5, 0) == 1.0);
  CHECK(ref.samples(15, 0) == 0.0);
}

TEST_CASE("affine offset fixture: per-step increments stay bounded") {
  // past 0.1*t, new 0.1*t + 0.3; increment bound 0.1 + 0.3/(t_b - t_d)
  Trajectory past;
  past.samples.resize(60, 1);
  for (int i = 0; i < 60; ++i) {
    past.samples(i, 0) = 0.1 * i;
  }
  past.rate_hz = 30.0;
  past.start_step = 0;

  Chunk chunk;
  chunk.samples.resize(50, 1);
  for (int i = 0; i < 50; ++i) {
    chunk.samples(i, 0) = 0.1 * i + 0.3;
  }
  chunk.start_step = 0;

  const auto ref = build_reference(past, chunk, windows(5, 10));
  double max_increment = 0.0;
  for (int i = 1; i < 50; ++i) {
    max_increment = std::max(max_increment, std::abs(ref.samples(i, 0) - ref.samples(i - 1, 0)));
  }
  CHECK(max_increment <= 0.1 + 0.3 / 10.0 + 1e-12);
}

TEST_CASE("idempotence: equal inputs pass through bitwise") {
  std::mt19937_64 rng(21);
  Chunk chunk;
  chunk.samples.resize(50, 3);
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      chunk.samples(i, j) = uniform(rng, -3.14, 3.14);
    }
  }
  chunk.start_step = 35;
  Trajectory past;
  past.samples = chunk.samples.topRows(20);
  past.rate_hz = 30.0;
  past.start_step = 35;

  const auto ref = build_reference(past, chunk, windows(5, 10));
  CHECK((ref.samples.array() == chunk.samples.array()).all());
}

TEST_CASE("boundary exactness and convex boundedness") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    Trajectory past;
    past.samples.resize(30, 2);
    Chunk chunk;
    chunk.samples.resize(40, 2);
    for (Eigen::Index i = 0; i < 30; ++i) {
      past.samples(i, 0) = uniform(rng, -3.0, 3.0);
      past.samples(i, 1) = uniform(rng, -3.0, 3.0);
    }
    for (Eigen::Index i = 0; i < 40; ++i) {
      chunk.samples(i, 0) = uniform(rng, -3.0, 3.0);
      chunk.samples(i, 1) = uniform(rng, -3.0, 3.0);
    }
    past.rate_hz = 30.0;
    past.start_step = 0;
    chunk.start_step = 4;

    const int delay = 1 + static_cast<int>(rng() % 5);
    const int blend = 1 + static_cast<int>(rng() % 10);
    const auto ref = build_reference(past, chunk, windows(delay, blend));

    const auto past_at = [&](int local, Eigen::Index j) {
      const auto offset = std::min<std::int64_t>(chunk.start_step + local - past.start_step,
                                                 past.samples.rows() - 1);
      return past.samples(offset, j);
    };
    for (Eigen::Index j = 0; j < 2; ++j) {
      CHECK(ref.samples(ref.delay_end, j) == past_at(ref.delay_end, j));
      CHECK(ref.samples(ref.blend_end, j) == chunk.samples(ref.blend_end, j));
      for (int i = 0; i < 40; ++i) {
        const double p = past_at(i, j);
        const double c = chunk.samples(i, j);
        CHECK(ref.samples(i, j) >= std::min(p, c));
        CHECK(ref.samples(i, j) <= std::max(p, c));
      }
    }
  }
}

TEST_CASE("symmetry: swapping inputs mirrors the weight") {
  std::mt19937_64 rng(23);
  Trajectory a_past, b_past;
  Chunk a_chunk, b_chunk;
  a_past.samples.resize(40, 1);
  b_past.samples.resize(40, 1);
  for (Eigen::Index i = 0; i < 40; ++i) {
    a_past.samples(i, 0) = uniform(rng, -2.0, 2.0);
    b_past.samples(i, 0) = uniform(rng, -2.0, 2.0);
  }
  a_past.rate_hz = b_past.rate_hz = 30.0;
  a_chunk.samples = b_past.samples.topRows(30);
  b_chunk.samples = a_past.samples.topRows(30);
  a_chunk.start_step = b_chunk.start_step = 0;

  const int delay = 3;
  const int blend = 8;
  const auto ab = build_reference(a_past, a_chunk, windows(delay, blend));
  const auto ba = build_reference(b_past, b_chunk, windows(delay, blend));
  // alpha(t) blending A into B equals 1 - alpha(t') at the mirrored step
  for (int i = delay + 1; i <= delay + blend; ++i) {
    const int mirrored = 2 * delay + blend - i;
    if (mirrored <= delay || mirrored > delay + blend) {
      continue;
    }
    const double alpha = blend_weight(i, delay, delay + blend);
    const double alpha_m = blend_weight(mirrored, delay, delay + blend);
    CHECK(alpha + alpha_m == doctest::Approx(1.0).epsilon(1e-15));
  }
  // spot-check: value of A->B at weight w equals B->A at weight 1-w
  const double w = blend_weight(delay + 2, delay, delay + blend);
  const double v_ab = (1 - w) * a_past.samples(delay + 2, 0) + w * b_past.samples(delay + 2, 0);
  CHECK(ab.samples(delay + 2, 0) == doctest::Approx(v_ab).epsilon(1e-15));
  const double v_ba = (1 - w) * b_past.samples(delay + 2, 0) + w * a_past.samples(delay + 2, 0);
  CHECK(ba.samples(delay + 2, 0) == doctest::Approx(v_ba).epsilon(1e-15));
}

TEST_CASE("short past tail holds its last sample through the windows") {
  const auto past = constant_past(0.7, 1, 0);
  Chunk chunk = constant_chunk(0.0, 50, 10);  // past ends 9 steps before the chunk
  const auto ref = build_reference(past, chunk, windows(5, 10));
  for (int i = 0; i <= 5; ++i) {
    CHECK(ref.samples(i, 0) == 0.7);
  }
  CHECK(ref.samples(15, 0) == 0.0);
  CHECK(ref.samples(10, 0) == doctest::Approx(0.7 * 0.5).epsilon(1e-15));
}

TEST_CASE("alignment and shape errors") {
  const auto past = constant_past(0.0, 20, 10);
  CHECK_THROWS_AS(build_reference(past, constant_chunk(0.0, 50, 5), windows(5, 10)),
                  DataError);  // past starts after the chunk

  Trajectory empty;
  empty.samples.resize(0, 1);
  empty.rate_hz = 30.0;
  CHECK_THROWS_AS(build_reference(empty, constant_chunk(0.0, 50, 0), windows(5, 10)),
                  DataError);

  Chunk two_joint = constant_chunk(0.0, 50, 10);
  two_joint.samples.resize(50, 2);
  two_joint.samples.setZero();
  CHECK_THROWS_AS(build_reference(past, two_joint, windows(5, 10)), DataError);

  // windows that do not fit in the segment
  CHECK_THROWS_AS(build_reference(past, constant_chunk(0.0, 4, 10), windows(5, 10)),
                  DataError);
}

TEST_CASE("regime labels are contiguous and ordered") {
  const auto past = constant_past(1.0, 20, 0);
  const auto ref = build_reference(past, constant_chunk(0.0, 50, 0), windows(5, 10));
  int delay_count = 0, blend_count = 0, path_count = 0;
  int phase = 0;
  for (const Regime r : ref.regimes) {
    const int order = r == Regime::kDelay ? 0 : (r == Regime::kBlend ? 1 : 2);
    CHECK(order >= phase);
    phase = order;
    (order == 0 ? delay_count : order == 1 ? blend_count : path_count) += 1;
  }
  CHECK(delay_count == 6);
  CHECK(blend_count == 10);
  CHECK(path_count == 34);
}
