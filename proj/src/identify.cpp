#include "cablesim/identify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cablesim/rne.hpp"

namespace cablesim {

void PoseLog::validate() const {
  std::map<int, double> last_t;
  for (const PoseLogEntry& entry : entries) {
    if (std::find(tag_order.begin(), tag_order.end(), entry.tag_id) == tag_order.end())
      throw std::invalid_argument("pose log references undeclared tag " +
                                  std::to_string(entry.tag_id));
    auto it = last_t.find(entry.tag_id);
    if (it != last_t.end() && entry.t <= it->second)
      throw std::invalid_argument("pose log timestamps for tag " +
                                  std::to_string(entry.tag_id) +
                                  " are not strictly increasing");
    last_t[entry.tag_id] = entry.t;
  }
}

std::vector<TagFrameSet> associate_instants(const PoseLog& log, double window_s) {
  log.validate();
  std::vector<const PoseLogEntry*> sorted;
  sorted.reserve(log.entries.size());
  for (const PoseLogEntry& entry : log.entries) sorted.push_back(&entry);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PoseLogEntry* a, const PoseLogEntry* b) { return a->t < b->t; });

  std::vector<TagFrameSet> sets;
  for (const PoseLogEntry* entry : sorted) {
    const bool start_new = sets.empty() ||
                           entry->t - sets.back().t > window_s ||
                           sets.back().frames.count(entry->tag_id) > 0;
    if (start_new) {
      sets.push_back(TagFrameSet{entry->t, {}});
    }
    sets.back().frames.emplace(entry->tag_id, entry->pose);
  }
  return sets;
}

VecX poses_to_joint_angles(const TagFrameSet& frames,
                           const std::vector<int>& tag_order,
                           const CableModel& model) {
  const int n = model.dof();
  if (static_cast<int>(tag_order.size()) != n + 1)
    throw std::invalid_argument("poses_to_joint_angles: " +
                                std::to_string(tag_order.size()) + " tags cannot measure " +
                                std::to_string(n) + " joints");
  VecX q(n);
  for (int i = 0; i < n; ++i) {
    auto base = frames.frames.find(tag_order[i]);
    auto next = frames.frames.find(tag_order[i + 1]);
    for (const auto& [id, it] : {std::pair{tag_order[i], base}, {tag_order[i + 1], next}}) {
      if (it == frames.frames.end()) {
        std::ostringstream msg;
        msg << "missing tag " << id << " at t = " << frames.t;
        throw std::runtime_error(msg.str());
      }
    }
    const Mat3 relative = base->second.rotation.transpose() * next->second.rotation;
    const Vec3 rotvec = rot_log(relative);
    const double off_pitch = std::hypot(rotvec.x(), rotvec.z());
    if (off_pitch > 0.05) {
      std::ostringstream msg;
      msg << "relative rotation between tags " << tag_order[i] << " and "
          << tag_order[i + 1] << " at t = " << frames.t
          << " has off-pitch component " << off_pitch << " rad";
      throw std::runtime_error(msg.str());
    }
    q[i] = rotvec.y();
  }
  return q;
}

namespace {

VecX interpolate(const std::vector<StateSample>& samples, size_t hint, double t) {
  size_t i = hint;
  while (i + 2 < samples.size() && samples[i + 1].t <= t) ++i;
  const double t0 = samples[i].t, t1 = samples[i + 1].t;
  const double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
  return (1.0 - w) * samples[i].state.q + w * samples[i + 1].state.q;
}

std::vector<StateSample> differentiate_segment(const std::vector<StateSample>& segment,
                                               int window, double dt) {
  const int n = static_cast<int>(segment.front().state.q.size());
  const double span = segment.back().t - segment.front().t;
  const int count = static_cast<int>(std::floor(span / dt + 1e-9)) + 1;
  if (count < 5) return {};

  // Uniform resampling by linear interpolation.
  std::vector<double> times(count);
  std::vector<VecX> raw(count);
  size_t hint = 0;
  for (int j = 0; j < count; ++j) {
    times[j] = segment.front().t + j * dt;
    while (hint + 2 < segment.size() && segment[hint + 1].t <= times[j]) ++hint;
    raw[j] = interpolate(segment, hint, times[j]);
  }

  // Centered moving average, truncated near the edges.
  const int half = window / 2;
  std::vector<VecX> smooth(count);
  for (int j = 0; j < count; ++j) {
    const int lo = std::max(0, j - half);
    const int hi = std::min(count - 1, j + half);
    VecX acc = VecX::Zero(n);
    for (int k = lo; k <= hi; ++k) acc += raw[k];
    smooth[j] = acc / static_cast<double>(hi - lo + 1);
  }

  std::vector<StateSample> out(count);
  for (int j = 0; j < count; ++j) {
    StateSample& sample = out[j];
    sample.t = times[j];
    sample.state.q = smooth[j];
    sample.quality = (raw[j] - smooth[j]).cwiseAbs();
    sample.boundary = j < half + 1 || j >= count - half - 1;
    if (j == 0) {
      sample.state.qd = (smooth[1] - smooth[0]) / dt;
      sample.state.qdd = (smooth[2] - 2.0 * smooth[1] + smooth[0]) / (dt * dt);
    } else if (j == count - 1) {
      sample.state.qd = (smooth[j] - smooth[j - 1]) / dt;
      sample.state.qdd =
          (smooth[j] - 2.0 * smooth[j - 1] + smooth[j - 2]) / (dt * dt);
    } else {
      sample.state.qd = (smooth[j + 1] - smooth[j - 1]) / (2.0 * dt);
      sample.state.qdd = (smooth[j + 1] - 2.0 * smooth[j] + smooth[j - 1]) / (dt * dt);
    }
  }
  return out;
}

}  // namespace

std::vector<StateSample> differentiate_log(const std::vector<StateSample>& positions,
                                           int window, double dt_uniform) {
  if (positions.size() < 5)
    throw std::invalid_argument("differentiate_log: need at least 5 samples, got " +
                                std::to_string(positions.size()));
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("differentiate_log: window must be odd and positive");

  std::vector<double> gaps;
  for (size_t i = 1; i < positions.size(); ++i) {
    const double gap = positions[i].t - positions[i - 1].t;
    if (!(gap > 0.0))
      throw std::invalid_argument("differentiate_log: non-monotone timestamps at t = " +
                                  std::to_string(positions[i].t));
    gaps.push_back(gap);
  }
  double dt = dt_uniform;
  if (dt <= 0.0) {
    std::vector<double> sorted = gaps;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    dt = sorted[sorted.size() / 2];
  }

  std::vector<StateSample> result;
  std::vector<StateSample> segment{positions.front()};
  auto flush = [&]() {
    const std::vector<StateSample> part = differentiate_segment(segment, window, dt);
    result.insert(result.end(), part.begin(), part.end());
    segment.clear();
  };
  for (size_t i = 1; i < positions.size(); ++i) {
    if (positions[i].t - positions[i - 1].t > 5.0 * dt) flush();
    segment.push_back(positions[i]);
  }
  flush();
  if (result.empty())
    throw std::invalid_argument("differentiate_log: no segment long enough to differentiate");
  return result;
}

namespace {

// Least-squares solution of (column) a * x = b via the pseudoinverse with a
// relative singular-value cutoff. Returns false on rank deficiency.
bool scalar_least_squares(const VecX& a, const VecX& b, double& x, double& sse) {
  const double sigma = a.norm();
  if (sigma <= 1e-10 * std::max(1.0, b.norm()) || sigma == 0.0) return false;
  x = a.dot(b) / (sigma * sigma);
  sse = (b - x * a).squaredNorm();
  return true;
}

}  // namespace

VecX identify_stiffness(const CableModel& model,
                        const std::vector<StateSample>& static_samples,
                        const std::vector<ExternalLoad>& loads) {
  const int n = model.dof();
  if (static_samples.empty())
    throw std::invalid_argument("identify_stiffness: no samples");
  for (const StateSample& sample : static_samples) {
    if (sample.state.qd.size() == n &&
        sample.state.qd.lpNorm<Eigen::Infinity>() >= 1e-3)
      throw std::invalid_argument(
          "identify_stiffness: sample at t = " + std::to_string(sample.t) +
          " violates the stationary precondition (|qd| >= 1e-3 rad/s)");
  }

  const int rows = static_cast<int>(static_samples.size());
  MatX regressor(rows, n);
  MatX rhs(rows, n);
  for (int s = 0; s < rows; ++s) {
    const VecX& q = static_samples[s].state.q;
    if (q.size() != n)
      throw std::invalid_argument("identify_stiffness: sample dimension mismatch");
    const VecX torque =
        -(gravity_torque(model, q) + load_torque(model, q, loads));
    regressor.row(s) = q.transpose();
    rhs.row(s) = torque.transpose();
  }

  VecX stiffness(n);
  for (int i = 0; i < n; ++i) {
    double k = 0.0, sse = 0.0;
    if (!scalar_least_squares(regressor.col(i), rhs.col(i), k, sse))
      throw std::runtime_error("identify_stiffness: rank-deficient regressor for joint " +
                               std::to_string(i));
    if (k < 0.0)
      throw std::runtime_error("identify_stiffness: negative stiffness estimate " +
                               std::to_string(k) + " for joint " + std::to_string(i));
    stiffness[i] = k;
  }
  return stiffness;
}

VecX identify_damping(const CableModel& model, const VecX& stiffness,
                      const std::vector<StateSample>& dynamic_samples,
                      const std::vector<ExternalLoad>& loads) {
  const int n = model.dof();
  if (stiffness.size() != n)
    throw std::invalid_argument("identify_damping: stiffness dimension mismatch");
  bool any_moving = false;
  for (const StateSample& sample : dynamic_samples)
    any_moving = any_moving || sample.state.qd.lpNorm<Eigen::Infinity>() > 1e-2;
  if (!any_moving)
    throw std::invalid_argument(
        "identify_damping: all samples static, need motion above 1e-2 rad/s");

  const int rows = static_cast<int>(dynamic_samples.size());
  MatX regressor(rows, n);
  MatX rhs(rows, n);
  for (int s = 0; s < rows; ++s) {
    const StateSample& sample = dynamic_samples[s];
    check_state(model, sample.state, /*enforce_limits=*/false);
    const VecX torque = -(rne(model, sample.state, /*gravity_on=*/true) +
                          load_torque(model, sample.state.q, loads) +
                          stiffness.cwiseProduct(sample.state.q));
    regressor.row(s) = sample.state.qd.transpose();
    rhs.row(s) = torque.transpose();
  }

  VecX damping(n);
  for (int i = 0; i < n; ++i) {
    double d = 0.0, sse = 0.0;
    if (!scalar_least_squares(regressor.col(i), rhs.col(i), d, sse))
      throw std::runtime_error("identify_damping: rank-deficient regressor for joint " +
                               std::to_string(i));
    if (d < 0.0)
      throw std::runtime_error("identify_damping: negative damping estimate " +
                               std::to_string(d) + " for joint " + std::to_string(i));
    damping[i] = d;
  }
  return damping;
}

namespace {

// Earliest index still inside the final contiguous recording (no timestamp
// jump above five typical spacings).
template <typename TimeOf>
size_t final_segment_start(size_t count, const TimeOf& time_of) {
  if (count < 2) return 0;
  std::vector<double> deltas;
  for (size_t i = count - 1; i > 0 && deltas.size() < 32; --i)
    deltas.push_back(time_of(i) - time_of(i - 1));
  std::nth_element(deltas.begin(), deltas.begin() + deltas.size() / 2, deltas.end());
  const double typical_dt = deltas[deltas.size() / 2];
  size_t start = count - 1;
  while (start > 0 && time_of(start) - time_of(start - 1) <= 5.0 * typical_dt) --start;
  return start;
}

// Start time of the largest trailing window whose per-joint position trend
// is statistically flat, judged on the raw (unsmoothed) instants so the
// noise entering the slope standard error is uncorrelated. The base window
// must pass at 4 sigma, extensions at 3. Returns NaN when even the base
// window shows a trend.
double stationary_tail_by_trend(const std::vector<StateSample>& raw,
                                const IdentificationOptions& options) {
  const size_t count = raw.size();
  if (count < 8) return std::numeric_limits<double>::quiet_NaN();
  const int n = static_cast<int>(raw.front().state.q.size());

  // Per-joint linear fit over [start, end); reports the worst slope-to-
  // tolerance ratio and the largest residual deviation.
  auto window_is_flat = [&](size_t start, double confidence, double max_sigma) {
    const size_t rows = count - start;
    if (rows < 8) return false;
    double t_mean = 0.0;
    for (size_t i = start; i < count; ++i) t_mean += raw[i].t;
    t_mean /= static_cast<double>(rows);
    double t_var = 0.0;
    for (size_t i = start; i < count; ++i) {
      const double dt = raw[i].t - t_mean;
      t_var += dt * dt;
    }
    if (t_var <= 0.0) return false;
    for (int j = 0; j < n; ++j) {
      double q_mean = 0.0;
      for (size_t i = start; i < count; ++i) q_mean += raw[i].state.q[j];
      q_mean /= static_cast<double>(rows);
      double covariance = 0.0;
      for (size_t i = start; i < count; ++i)
        covariance += (raw[i].t - t_mean) * (raw[i].state.q[j] - q_mean);
      const double slope = covariance / t_var;
      double sse = 0.0;
      for (size_t i = start; i < count; ++i) {
        const double fit = q_mean + slope * (raw[i].t - t_mean);
        const double r = raw[i].state.q[j] - fit;
        sse += r * r;
      }
      const double residual_sigma = std::sqrt(sse / static_cast<double>(rows - 2));
      const double slope_sigma = residual_sigma / std::sqrt(t_var);
      // A wide residual band would let any slope pass the confidence test;
      // flatness also requires the band itself to stay at the noise level
      // measured on the base window.
      if (max_sigma > 0.0 && residual_sigma > max_sigma) return false;
      if (std::abs(slope) >= std::max(options.static_threshold, confidence * slope_sigma))
        return false;
    }
    return true;
  };

  auto window_sigma = [&](size_t start) {
    const size_t rows = count - start;
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      double q_mean = 0.0;
      for (size_t i = start; i < count; ++i) q_mean += raw[i].state.q[j];
      q_mean /= static_cast<double>(rows);
      double sse = 0.0;
      for (size_t i = start; i < count; ++i) {
        const double r = raw[i].state.q[j] - q_mean;
        sse += r * r;
      }
      worst = std::max(worst, std::sqrt(sse / static_cast<double>(rows)));
    }
    return worst;
  };

  const size_t segment_start =
      final_segment_start(count, [&](size_t i) { return raw[i].t; });
  size_t base = count;
  while (base > segment_start &&
         raw.back().t - raw[base - 1].t < options.min_stationary_tail)
    --base;
  if (base <= segment_start || !window_is_flat(base, 4.0, 0.0))
    return std::numeric_limits<double>::quiet_NaN();

  const double noise_sigma = std::max(window_sigma(base), 1e-12);
  size_t start = base;
  while (start > segment_start && window_is_flat(start - 1, 3.0, 2.0 * noise_sigma))
    --start;
  return raw[start].t;
}

void apply_identified(CableModel& model, const VecX& stiffness, const VecX& damping) {
  int k = 0;
  for (JointSpec& joint : model.joints) {
    if (joint.pitch && !joint.pitch->locked()) {
      joint.pitch->stiffness = stiffness[k];
      joint.pitch->damping = damping[k];
      ++k;
    }
    if (joint.roll && !joint.roll->locked()) {
      joint.roll->stiffness = stiffness[k];
      joint.roll->damping = damping[k];
      ++k;
    }
  }
}

double stacked_residual_rms(const CableModel& model, const VecX& stiffness,
                            const VecX& damping,
                            const std::vector<StateSample>& static_samples,
                            const std::vector<StateSample>& dynamic_samples,
                            const std::vector<ExternalLoad>& loads) {
  double sse = 0.0;
  int rows = 0;
  for (const StateSample& sample : static_samples) {
    const VecX r = stiffness.cwiseProduct(sample.state.q) +
                   gravity_torque(model, sample.state.q) +
                   load_torque(model, sample.state.q, loads);
    sse += r.squaredNorm();
    rows += static_cast<int>(r.size());
  }
  for (const StateSample& sample : dynamic_samples) {
    const VecX r = rne(model, sample.state, true) +
                   load_torque(model, sample.state.q, loads) +
                   stiffness.cwiseProduct(sample.state.q) +
                   damping.cwiseProduct(sample.state.qd);
    sse += r.squaredNorm();
    rows += static_cast<int>(r.size());
  }
  return rows > 0 ? std::sqrt(sse / rows) : 0.0;
}

}  // namespace

IdentificationResult run_identification(const CableModel& model, const PoseLog& log,
                                        const std::vector<ExternalLoad>& loads,
                                        const IdentificationOptions& options) {
  if (log.entries.empty())
    throw std::invalid_argument("run_identification: empty pose log");

  IdentificationResult result;
  const std::vector<TagFrameSet> instants =
      associate_instants(log, options.association_window);
  result.instants = static_cast<int>(instants.size());

  std::vector<StateSample> positions;
  positions.reserve(instants.size());
  for (const TagFrameSet& instant : instants) {
    StateSample sample;
    sample.t = instant.t;
    try {
      sample.state.q = poses_to_joint_angles(instant, log.tag_order, model);
    } catch (const std::runtime_error&) {
      ++result.dropped_instants;  // incomplete or inconsistent frame set
      continue;
    }
    sample.state.qd = VecX::Zero(model.dof());
    sample.state.qdd = VecX::Zero(model.dof());
    positions.push_back(sample);
  }
  if (positions.size() < 5)
    throw std::runtime_error("run_identification: only " +
                             std::to_string(positions.size()) +
                             " usable instants in the log");

  const std::vector<StateSample> samples =
      differentiate_log(positions, options.smoothing_window, options.dt_uniform);

  // Stationary tail, first by the velocity threshold (exact on clean data),
  // then by a noise-adaptive trend test: measurement noise alone puts the
  // differentiated velocity well above any physical threshold. Both
  // detections stay inside the final recording segment; earlier samples can
  // be slow without being settled.
  const size_t segment_start =
      final_segment_start(samples.size(), [&](size_t i) { return samples[i].t; });
  size_t tail_start = samples.size();
  while (tail_start > segment_start) {
    const StateSample& sample = samples[tail_start - 1];
    if (!sample.boundary &&
        sample.state.qd.lpNorm<Eigen::Infinity>() >= options.static_threshold)
      break;
    --tail_start;
  }
  double tail_time = tail_start < samples.size()
                         ? samples[tail_start].t
                         : std::numeric_limits<double>::quiet_NaN();
  double tail_span = tail_start < samples.size()
                         ? samples.back().t - samples[tail_start].t
                         : 0.0;
  if (!(tail_span >= options.min_stationary_tail))
    tail_time = stationary_tail_by_trend(positions, options);

  std::vector<StateSample> static_samples;
  if (std::isfinite(tail_time)) {
    for (const StateSample& sample : samples) {
      if (sample.t < tail_time || sample.boundary) continue;
      StateSample stationary = sample;
      stationary.state.qd.setZero();   // stationary premise
      stationary.state.qdd.setZero();
      static_samples.push_back(stationary);
    }
  }
  tail_span = static_samples.empty()
                  ? 0.0
                  : samples.back().t - static_samples.front().t;
  if (static_samples.empty() || tail_span < options.min_stationary_tail) {
    std::ostringstream msg;
    msg << "run_identification: no stationary tail of at least "
        << options.min_stationary_tail << " s (found " << tail_span << " s)";
    throw std::runtime_error(msg.str());
  }

  std::vector<StateSample> dynamic_samples;
  for (const StateSample& sample : samples) {
    if (sample.t >= tail_time || sample.boundary) continue;
    if (sample.state.qd.lpNorm<Eigen::Infinity>() > options.dynamic_threshold)
      dynamic_samples.push_back(sample);
  }
  result.static_samples = static_cast<int>(static_samples.size());
  result.dynamic_samples = static_cast<int>(dynamic_samples.size());

  const VecX stiffness = identify_stiffness(model, static_samples, loads);
  const VecX damping = identify_damping(model, stiffness, dynamic_samples, loads);

  result.params.stiffness = stiffness;
  result.params.damping = damping;
  result.params.residual = stacked_residual_rms(model, stiffness, damping,
                                                static_samples, dynamic_samples, loads);
  double min_col = std::numeric_limits<double>::infinity();
  double max_col = 0.0;
  for (int i = 0; i < model.dof(); ++i) {
    double qn = 0.0, qdn = 0.0;
    for (const StateSample& s : static_samples) qn += s.state.q[i] * s.state.q[i];
    for (const StateSample& s : dynamic_samples) qdn += s.state.qd[i] * s.state.qd[i];
    min_col = std::min({min_col, std::sqrt(qn), std::sqrt(qdn)});
    max_col = std::max({max_col, std::sqrt(qn), std::sqrt(qdn)});
  }
  result.params.condition = min_col > 0.0 ? max_col / min_col
                                          : std::numeric_limits<double>::infinity();

  result.updated = model;
  apply_identified(result.updated, stiffness, damping);
  return result;
}

}  // namespace cablesim
