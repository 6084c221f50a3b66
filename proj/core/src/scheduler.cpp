#include "lipo/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "lipo/trajectory_io.hpp"

namespace lipo {

namespace {

bool is_lipo(ExecutionMode mode) {
  return mode == ExecutionMode::kLiPoQuintic || mode == ExecutionMode::kLiPoLinear;
}

bool uses_quintic(ExecutionMode mode) {
  return mode == ExecutionMode::kLiPoQuintic || mode == ExecutionMode::kRawQuintic ||
         mode == ExecutionMode::kTemporalEnsemble;
}

// Blend + per-joint QP for one segment. On solver failure the blended
// reference is executed unchanged and the segment is marked degraded.
void optimize_segment(const Eigen::MatrixXd& past_rows, std::int64_t past_start,
                      const Chunk& chunk, const TimingConfig& timing,
                      const BoundsConfig& bounds, const SolverOptions& solver,
                      int delay_steps, int blend_steps, SegmentRecord& rec) {
  Trajectory past;
  past.samples = past_rows;
  past.rate_hz = timing.action_rate_hz;
  past.start_step = past_start;

  TimingConfig windows = timing;
  windows.delay_steps = delay_steps;
  windows.blend_steps = blend_steps;

  rec.reference = build_reference(past, chunk, windows);
  rec.stats.delay_end = rec.reference->delay_end;
  rec.stats.blend_end = rec.reference->blend_end;

  const double dt = timing.action_dt();
  const std::vector<QpProblem> problems = build_problems(*rec.reference, bounds, dt);

  rec.optimized = rec.reference->samples;
  Eigen::MatrixXd epsilon(rec.optimized.rows(), rec.optimized.cols());
  bool all_converged = true;
  int iterations = 0;
  double solve_time = 0.0;
  for (std::size_t j = 0; j < problems.size(); ++j) {
    const QpSolution sol = solve(problems[j], solver);
    iterations += sol.iterations;
    solve_time += sol.solve_time;
    all_converged = all_converged && sol.converged;
    epsilon.col(static_cast<Eigen::Index>(j)) = sol.epsilon;
  }
  if (all_converged) {
    rec.optimized += epsilon;
  } else {
    rec.stats.degraded = true;
  }
  rec.stats.qp_iterations = iterations;
  rec.stats.qp_converged = all_converged;
  rec.stats.solve_time = solve_time;
  rec.stats.qp_objective = jerk_energy(rec.optimized, dt);
}

std::string bool_field(bool value) { return value ? "1" : "0"; }

}  // namespace

std::string to_string(ExecutionMode mode) {
  switch (mode) {
    case ExecutionMode::kLiPoQuintic:
      return "LiPoQuintic";
    case ExecutionMode::kLiPoLinear:
      return "LiPoLinear";
    case ExecutionMode::kRawQuintic:
      return "RawQuintic";
    case ExecutionMode::kRawLinear:
      return "RawLinear";
    case ExecutionMode::kTemporalEnsemble:
      return "TemporalEnsemble";
  }
  return "unknown";
}

ExecutionMode parse_execution_mode(const std::string& name) {
  for (ExecutionMode mode : all_execution_modes()) {
    if (name == to_string(mode)) {
      return mode;
    }
  }
  throw ConfigError("unknown execution mode: " + name);
}

const std::vector<ExecutionMode>& all_execution_modes() {
  static const std::vector<ExecutionMode> modes = {
      ExecutionMode::kLiPoQuintic, ExecutionMode::kLiPoLinear, ExecutionMode::kRawQuintic,
      ExecutionMode::kRawLinear, ExecutionMode::kTemporalEnsemble};
  return modes;
}

JointVector temporal_ensemble(const std::vector<JointVector>& predictions_newest_first,
                              double m) {
  if (predictions_newest_first.empty()) {
    throw DataError("temporal ensemble requires at least one prediction");
  }
  const Eigen::Index joints = predictions_newest_first.front().size();
  Eigen::VectorXd accum = Eigen::VectorXd::Zero(joints);
  double total_weight = 0.0;
  for (std::size_t age = 0; age < predictions_newest_first.size(); ++age) {
    const JointVector& prediction = predictions_newest_first[age];
    if (prediction.size() != joints) {
      throw DataError("temporal ensemble predictions have mismatched joint counts");
    }
    const double w = std::exp(-m * static_cast<double>(age));
    accum += w * prediction;
    total_weight += w;
  }
  return accum / total_weight;
}

std::int64_t schedule_inference(std::int64_t next_chunk_start, std::int64_t now_step,
                                const TimingConfig& timing, int worst_case_latency) {
  const std::int64_t lead = static_cast<std::int64_t>(worst_case_latency) +
                            timing.delay_steps + timing.blend_steps;
  return std::max(next_chunk_start - lead, now_step);
}

// ---------------------------------------------------------------------------
// ControlEmitter

ControlEmitter::ControlEmitter(double action_rate_hz, double control_rate_hz, bool quintic,
                               Eigen::Index joints)
    : ratio_(rate_ratio(control_rate_hz, action_rate_hz)),
      dt_(1.0 / action_rate_hz),
      quintic_(quintic),
      joints_(joints),
      out_(0, joints) {}

void ControlEmitter::append_row(const Eigen::RowVectorXd& row) {
  if (rows_used_ == out_.rows()) {
    const Eigen::Index grown = std::max<Eigen::Index>(64, out_.rows() * 2);
    out_.conservativeResize(grown, joints_);
  }
  out_.row(rows_used_++) = row;
}

void ControlEmitter::knot_state(const Eigen::MatrixXd& committed, Eigen::Index knot,
                                Eigen::Index total_rows, bool flushing,
                                Eigen::RowVectorXd& vel, Eigen::RowVectorXd& acc) const {
  const double inv_2dt = 1.0 / (2.0 * dt_);
  const double inv_dt2 = 1.0 / (dt_ * dt_);
  if (knot == 0) {
    // session starts at rest
    vel = Eigen::RowVectorXd::Zero(joints_);
    acc = Eigen::RowVectorXd::Zero(joints_);
  } else if (flushing && knot == total_rows - 1) {
    // one-sided second-order end stencils, same grouping as the batch
    // estimator
    const Eigen::Index n = total_rows;
    vel = (3.0 * (committed.row(n - 1) - committed.row(n - 2)) +
           (committed.row(n - 3) - committed.row(n - 2))) *
          inv_2dt;
    acc = (2.0 * (committed.row(n - 1) - committed.row(n - 2)) -
           3.0 * (committed.row(n - 2) - committed.row(n - 3)) +
           (committed.row(n - 3) - committed.row(n - 4))) *
          inv_dt2;
  } else {
    vel = (committed.row(knot + 1) - committed.row(knot - 1)) * inv_2dt;
    acc = ((committed.row(knot + 1) - committed.row(knot)) -
           (committed.row(knot) - committed.row(knot - 1))) *
          inv_dt2;
  }
}

Eigen::MatrixXd ControlEmitter::emit_until(const Eigen::MatrixXd& committed,
                                           Eigen::Index limit_rows, bool flushing) {
  const Eigen::Index first = rows_used_;
  while (true) {
    const std::int64_t pos = next_index_ * ratio_.den;
    const std::int64_t seg = pos / ratio_.num;
    const std::int64_t rem = pos % ratio_.num;

    if (flushing) {
      if (seg > static_cast<std::int64_t>(limit_rows) - 2) {
        break;  // interior samples exhausted
      }
    } else {
      const std::int64_t needed = quintic_ ? seg + 2 : seg + 1;
      if (needed > static_cast<std::int64_t>(limit_rows) - 1) {
        break;
      }
    }

    if (rem == 0) {
      append_row(committed.row(seg));
    } else if (!quintic_) {
      const double t = static_cast<double>(rem) / static_cast<double>(ratio_.num);
      append_row(committed.row(seg) + t * (committed.row(seg + 1) - committed.row(seg)));
    } else {
      if (seg != cached_segment_) {
        Eigen::RowVectorXd v0(joints_), a0(joints_), v1(joints_), a1(joints_);
        knot_state(committed, seg, limit_rows, flushing, v0, a0);
        knot_state(committed, seg + 1, limit_rows, flushing, v1, a1);
        segment_ = hermite_segment(committed.row(seg), v0, a0, committed.row(seg + 1), v1,
                                   a1, dt_);
        cached_segment_ = seg;
      }
      const double tau =
          (static_cast<double>(rem) / static_cast<double>(ratio_.num)) * dt_;
      append_row(segment_.position(tau).transpose());
    }
    ++next_index_;
  }
  return out_.block(first, 0, rows_used_ - first, joints_);
}

Eigen::MatrixXd ControlEmitter::advance(const Eigen::MatrixXd& committed,
                                        Eigen::Index final_rows) {
  if (finished_) {
    throw std::logic_error("ControlEmitter already flushed");
  }
  return emit_until(committed, final_rows, false);
}

Eigen::MatrixXd ControlEmitter::flush(const Eigen::MatrixXd& committed,
                                      Eigen::Index total_rows) {
  if (finished_) {
    throw std::logic_error("ControlEmitter already flushed");
  }
  if (total_rows < 2) {
    throw DataError("too short for resampling: need at least 2 samples");
  }
  if (quintic_ && total_rows < 4) {
    throw DataError("too short for quintic resampling: need at least 4 samples");
  }
  cached_segment_ = -1;  // the final segment uses one-sided end stencils
  const Eigen::Index first = rows_used_;
  emit_until(committed, total_rows, true);
  append_row(committed.row(total_rows - 1));
  finished_ = true;
  return out_.block(first, 0, rows_used_ - first, joints_);
}

Eigen::MatrixXd ControlEmitter::take_output() {
  Eigen::MatrixXd result = out_.topRows(rows_used_);
  out_.resize(0, joints_);
  rows_used_ = 0;
  return result;
}

Trajectory upsample_for_execution(const Trajectory& action, double control_rate_hz,
                                  bool quintic) {
  validate(action);
  ControlEmitter emitter(action.rate_hz, control_rate_hz, quintic, action.joints());
  emitter.advance(action.samples, action.length());
  emitter.flush(action.samples, action.length());
  Trajectory out;
  out.samples = emitter.take_output();
  out.rate_hz = control_rate_hz;
  out.start_step = 0;
  return out;
}

// ---------------------------------------------------------------------------
// Session

struct Session::Plan {
  std::int64_t index = 0;
  SegmentRecord rec;
  Eigen::MatrixXd basis;  // the past rows the plan blended against
  std::int64_t basis_start = 0;
  bool basis_synthetic = false;  // hold derived from the chunk itself
  std::exception_ptr error;
};

struct Session::PlanQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Plan> ready;
  std::thread producer;

  ~PlanQueue() {
    if (producer.joinable()) {
      producer.join();
    }
  }

  void push(Plan plan) {
    {
      const std::lock_guard<std::mutex> lock(mu);
      ready.push_back(std::move(plan));
    }
    cv.notify_one();
  }

  Plan pop() {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return !ready.empty(); });
    Plan plan = std::move(ready.front());
    ready.pop_front();
    return plan;
  }
};

Session::Session(SessionConfig config)
    : config_(std::move(config)),
      stub_(config_.stub, config_.timing),
      emitter_(config_.timing.action_rate_hz, config_.timing.control_rate_hz,
               uses_quintic(config_.mode), stub_.joints()) {
  validate_config(config_.timing, config_.bounds);
  if (config_.chunks < 1) {
    throw ConfigError("session needs at least one chunk");
  }

  horizon_ = config_.timing.execute_horizon_steps;
  total_steps_ = config_.chunks * horizon_;
  const Eigen::Index capacity =
      (config_.chunks - 1) * horizon_ + config_.timing.chunk_len_steps;
  committed_.resize(capacity, stub_.joints());

  if (config_.mode == ExecutionMode::kTemporalEnsemble) {
    te_chunks_.resize(static_cast<std::size_t>(config_.timing.chunk_len_steps));
    return;
  }

  const int worst = stub_.worst_case_latency();
  issue_steps_.resize(static_cast<std::size_t>(config_.chunks));
  arrival_steps_.resize(static_cast<std::size_t>(config_.chunks));
  issue_steps_[0] = -static_cast<std::int64_t>(stub_.latency_steps(0));
  arrival_steps_[0] = 0;
  for (std::int64_t k = 1; k < config_.chunks; ++k) {
    const std::int64_t issue =
        schedule_inference(k * horizon_, arrival_steps_[static_cast<std::size_t>(k - 1)],
                           config_.timing, worst);
    issue_steps_[static_cast<std::size_t>(k)] = issue;
    arrival_steps_[static_cast<std::size_t>(k)] = issue + stub_.latency_steps(k);
  }

  const std::int64_t margin =
      horizon_ - (worst + config_.timing.delay_steps + config_.timing.blend_steps);
  if (margin < 0) {
    config_warning_ = true;
    events_.push_back("step=0 ev=config_warning margin=" + std::to_string(margin) +
                      " detail=latency_exceeds_horizon_stalls_expected");
  }

  if (config_.threaded) {
    queue_ = std::make_unique<PlanQueue>();
    queue_->producer = std::thread([this] {
      for (std::int64_t k = 0; k < config_.chunks; ++k) {
        Plan plan;
        plan.index = k;
        try {
          plan = make_plan(k);
        } catch (...) {
          plan.error = std::current_exception();
          queue_->push(std::move(plan));
          return;
        }
        queue_->push(std::move(plan));
      }
    });
  }
}

Session::~Session() = default;

void Session::build_lipo_segment(const Eigen::MatrixXd& past_rows, std::int64_t past_start,
                                 const Chunk& chunk, int delay_steps, int blend_steps,
                                 SegmentRecord& rec) const {
  optimize_segment(past_rows, past_start, chunk, config_.timing, config_.bounds,
                   config_.solver, delay_steps, blend_steps, rec);
}

Session::Plan Session::make_plan(std::int64_t k) {
  Plan plan;
  plan.index = k;
  const std::int64_t start = k * horizon_;
  const Chunk chunk = stub_.predict(k, start, issue_steps_[static_cast<std::size_t>(k)]);

  SegmentRecord& rec = plan.rec;
  rec.raw = chunk.samples;
  rec.stats.segment = k;
  rec.stats.issue_step = issue_steps_[static_cast<std::size_t>(k)];
  rec.stats.arrival_step = arrival_steps_[static_cast<std::size_t>(k)];
  rec.stats.start_step = start;

  if (is_lipo(config_.mode)) {
    if (k == 0 || chain_tail_.rows() == 0) {
      plan.basis = chunk.samples.topRows(1);
      plan.basis_start = start;
      plan.basis_synthetic = true;
    } else {
      plan.basis = chain_tail_;
      plan.basis_start = chain_tail_start_;
    }
    build_lipo_segment(plan.basis, plan.basis_start, chunk, config_.timing.delay_steps,
                       config_.timing.blend_steps, rec);
  } else {
    rec.optimized = chunk.samples;
    rec.stats.qp_objective = jerk_energy(rec.optimized, config_.timing.action_dt());
  }

  const Eigen::Index tail_rows = config_.timing.chunk_len_steps - horizon_;
  chain_tail_ = rec.optimized.bottomRows(tail_rows);
  chain_tail_start_ = start + horizon_;
  return plan;
}

Session::Plan Session::obtain_plan(std::int64_t k) {
  if (queue_) {
    Plan plan = queue_->pop();
    if (plan.error) {
      std::rethrow_exception(plan.error);
    }
    if (plan.index != k) {
      throw std::logic_error("segment plans arrived out of order");
    }
    return plan;
  }
  return make_plan(k);
}

void Session::integrate(Plan&& plan, std::int64_t now) {
  SegmentRecord rec = std::move(plan.rec);
  const std::int64_t start = rec.stats.start_step;
  const Eigen::Index segment_rows = rec.optimized.rows();
  if (start > committed_rows_) {
    throw std::logic_error("segment would leave a gap in the committed trajectory");
  }

  if (is_lipo(config_.mode)) {
    // Rows before `now` have executed and stay as they are; the reference's
    // freeze window must cover them all.
    const std::int64_t needed_delay = now - start - 1;
    const bool late = needed_delay > config_.timing.delay_steps;
    bool basis_ok;
    if (plan.basis_synthetic) {
      basis_ok = committed_rows_ <= plan.basis_start;
    } else {
      const Eigen::Index basis_rows = plan.basis.rows();
      basis_ok = committed_rows_ >= plan.basis_start + basis_rows &&
                 (committed_.block(plan.basis_start, 0, basis_rows, committed_.cols())
                      .array() == plan.basis.array())
                     .all();
    }
    if (late || !basis_ok) {
      // Replan against the committed reality: freeze every executed step and
      // blend from there.
      const int eff_delay = static_cast<int>(std::min<std::int64_t>(
          std::max<std::int64_t>(config_.timing.delay_steps, needed_delay),
          segment_rows - 1));
      const int eff_blend = static_cast<int>(std::min<std::int64_t>(
          config_.timing.blend_steps, segment_rows - eff_delay));
      Eigen::MatrixXd past_rows;
      if (committed_rows_ > start) {
        past_rows = committed_.block(start, 0, committed_rows_ - start, committed_.cols());
      } else if (committed_rows_ > 0) {
        past_rows = committed_.row(committed_rows_ - 1);
      } else {
        past_rows = rec.raw.topRows(1);
      }
      Chunk chunk;
      chunk.samples = rec.raw;
      chunk.start_step = start;
      chunk.inference_issue_step = rec.stats.issue_step;
      chunk.arrival_step = rec.stats.arrival_step;
      build_lipo_segment(past_rows, start, chunk, eff_delay, eff_blend, rec);
      rec.stats.late = late;
    }
  } else {
    rec.stats.late = now >= start;
  }

  // Row `now` has not executed or been emitted yet, so it is writable.
  const std::int64_t write_from = std::max(start, now);
  const Eigen::Index count = start + segment_rows - write_from;
  if (count > 0) {
    committed_.block(write_from, 0, count, committed_.cols()) =
        rec.optimized.bottomRows(count);
  }
  committed_rows_ = std::max<Eigen::Index>(committed_rows_, start + segment_rows);

  ++inference_count_;
  if (rec.stats.degraded) {
    ++degraded_segments_;
  }
  log_segment(rec, now);
  segments_.push_back(std::move(rec));
}

void Session::log_segment(const SegmentRecord& rec, std::int64_t now) {
  const SegmentStats& s = rec.stats;
  events_.push_back("step=" + std::to_string(now) + " ev=segment seg=" +
                    std::to_string(s.segment) + " issue=" + std::to_string(s.issue_step) +
                    " arrival=" + std::to_string(s.arrival_step) + " start=" +
                    std::to_string(s.start_step) + " delay_end=" +
                    std::to_string(s.delay_end) + " blend_end=" +
                    std::to_string(s.blend_end) + " qp_iters=" +
                    std::to_string(s.qp_iterations) + " qp_converged=" +
                    bool_field(s.qp_converged) + " objective=" +
                    format_double(s.qp_objective) + " degraded=" + bool_field(s.degraded) +
                    " late=" + bool_field(s.late));
}

void Session::integrate_pending(std::int64_t now) {
  while (next_segment_ < config_.chunks &&
         arrival_steps_[static_cast<std::size_t>(next_segment_)] <= now) {
    integrate(obtain_plan(next_segment_), now);
    ++next_segment_;
  }
}

void Session::step_temporal_ensemble() {
  const std::int64_t t = exec_;
  const int chunk_len = config_.timing.chunk_len_steps;
  const Chunk chunk = stub_.predict(t, t, t);
  ++inference_count_;
  te_chunks_[static_cast<std::size_t>(t % chunk_len)] = chunk.samples;

  std::vector<JointVector> predictions;
  const std::int64_t max_age = std::min<std::int64_t>(t, chunk_len - 1);
  predictions.reserve(static_cast<std::size_t>(max_age + 1));
  for (std::int64_t age = 0; age <= max_age; ++age) {
    const auto& past_chunk = te_chunks_[static_cast<std::size_t>((t - age) % chunk_len)];
    predictions.push_back(past_chunk.row(age).transpose());
  }
  committed_.row(t) = temporal_ensemble(predictions, config_.ensemble_decay).transpose();
  committed_rows_ = t + 1;
}

Eigen::MatrixXd Session::step() {
  if (done()) {
    throw std::logic_error("session already complete");
  }
  const std::int64_t now = exec_;
  if (config_.mode == ExecutionMode::kTemporalEnsemble) {
    step_temporal_ensemble();
  } else {
    integrate_pending(now);
    if (committed_rows_ <= now) {
      // Starved: hold the last commanded position and record the stall.
      if (committed_rows_ > 0) {
        committed_.row(now) = committed_.row(committed_rows_ - 1);
      } else {
        committed_.row(now).setZero();
      }
      committed_rows_ = now + 1;
      ++stall_count_;
      events_.push_back("step=" + std::to_string(now) + " ev=stall");
    }
  }
  exec_ = now + 1;
  return emitter_.advance(committed_, exec_);
}

SessionResult Session::finish() {
  if (!done()) {
    throw std::logic_error("session still has steps to execute");
  }
  if (finished_) {
    throw std::logic_error("finish() called twice");
  }
  finished_ = true;

  emitter_.flush(committed_, total_steps_);

  events_.push_back("step=" + std::to_string(total_steps_) + " ev=end steps=" +
                    std::to_string(total_steps_) + " stalls=" + std::to_string(stall_count_) +
                    " inferences=" + std::to_string(inference_count_) + " degraded=" +
                    std::to_string(degraded_segments_));

  SessionResult result;
  result.committed.samples = committed_.topRows(total_steps_);
  result.committed.rate_hz = config_.timing.action_rate_hz;
  result.committed.start_step = 0;
  result.executed.samples = emitter_.take_output();
  result.executed.rate_hz = config_.timing.control_rate_hz;
  result.executed.start_step = 0;
  result.segments = std::move(segments_);
  result.event_log = std::move(events_);
  result.stall_count = stall_count_;
  result.inference_count = inference_count_;
  result.degraded_segments = degraded_segments_;
  result.config_warning = config_warning_;
  return result;
}

SessionResult run_session(const SessionConfig& config) {
  Session session(config);
  while (!session.done()) {
    session.step();
  }
  return session.finish();
}

OfflineResult smooth_stream(const std::vector<Chunk>& chunks, const TimingConfig& timing,
                            const BoundsConfig& bounds, double control_rate_hz,
                            const SolverOptions& solver) {
  if (chunks.empty()) {
    throw DataError("no chunks to smooth");
  }
  const Eigen::Index joints = chunks.front().joints();
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    validate(chunks[k]);
    if (chunks[k].joints() != joints) {
      throw DataError("chunk " + std::to_string(k) + " has a mismatched joint count");
    }
    if (k > 0) {
      if (chunks[k].start_step <= chunks[k - 1].start_step) {
        throw DataError("chunk " + std::to_string(k) + " does not advance the stream");
      }
      if (chunks[k].start_step > chunks[k - 1].start_step + chunks[k - 1].length()) {
        throw DataError("gap between chunk " + std::to_string(k - 1) + " and chunk " +
                        std::to_string(k));
      }
    }
  }

  const std::int64_t base = chunks.front().start_step;
  const Eigen::Index total_rows =
      chunks.back().start_step + chunks.back().length() - base;
  Eigen::MatrixXd committed(total_rows, joints);
  Eigen::Index committed_rows = 0;

  OfflineResult result;
  result.segments.reserve(chunks.size());
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    const Chunk& chunk = chunks[k];
    const Eigen::Index offset = chunk.start_step - base;

    Eigen::MatrixXd past_rows;
    if (committed_rows > offset) {
      past_rows = committed.block(offset, 0, committed_rows - offset, joints);
    } else if (committed_rows > 0) {
      past_rows = committed.row(committed_rows - 1);
    } else {
      past_rows = chunk.samples.topRows(1);
    }

    SegmentRecord rec;
    rec.raw = chunk.samples;
    rec.stats.segment = static_cast<std::int64_t>(k);
    rec.stats.issue_step = chunk.inference_issue_step;
    rec.stats.arrival_step = chunk.arrival_step;
    rec.stats.start_step = chunk.start_step;
    optimize_segment(past_rows, chunk.start_step, chunk, timing, bounds, solver,
                     timing.delay_steps, timing.blend_steps, rec);
    if (rec.stats.degraded) {
      ++result.degraded_segments;
    }

    committed.block(offset, 0, chunk.length(), joints) = rec.optimized;
    committed_rows = std::max<Eigen::Index>(committed_rows, offset + chunk.length());
    result.segments.push_back(std::move(rec));
  }

  result.committed.samples = committed;
  result.committed.rate_hz = timing.action_rate_hz;
  result.committed.start_step = base;
  result.executed = upsample_for_execution(result.committed, control_rate_hz, true);
  return result;
}

}  // namespace lipo
