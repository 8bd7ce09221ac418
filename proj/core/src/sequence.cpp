#include "qlockin/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace qlockin {

namespace {

void check_pulse_windows(const PulseSequence& seq) {
  const auto& p = seq.pulses;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].time - 0.5 * p[i].duration < 0.0 ||
        p[i].time + 0.5 * p[i].duration > seq.total_duration) {
      throw std::invalid_argument("pulse window outside [0, T]");
    }
    if (i > 0) {
      const double gap = p[i].time - p[i - 1].time;
      if (gap <= 0.0) throw std::invalid_argument("pulses not strictly ordered");
      if (0.5 * (p[i].duration + p[i - 1].duration) > gap) {
        throw std::invalid_argument("finite-duration pulses overlap");
      }
    }
  }
}

}  // namespace

PulseSequence make_cpmg(std::size_t n_pi, double tau_arm, PhasePolicy policy,
                        double pulse_duration) {
  if (!(tau_arm > 0.0)) throw std::invalid_argument("tau_arm must be > 0");
  if (pulse_duration < 0.0) throw std::invalid_argument("pulse duration must be >= 0");

  PulseSequence seq;
  seq.kind = "cpmg";
  seq.tau_arm = tau_arm;
  seq.total_duration = static_cast<double>(n_pi + 1) * tau_arm;
  seq.phase_policy = policy;
  seq.pulses.reserve(n_pi);
  for (std::size_t k = 1; k <= n_pi; ++k) {
    Pulse p;
    p.time = static_cast<double>(k) * tau_arm;
    p.rotation_angle = std::numbers::pi;
    p.axis_phase = (policy == PhasePolicy::xy_alternating && k % 2 == 0)
                       ? 0.5 * std::numbers::pi
                       : 0.0;
    p.duration = pulse_duration;
    seq.pulses.push_back(p);
  }
  check_pulse_windows(seq);
  return seq;
}

PulseSequence make_uhrig(std::size_t n_pi, double total_duration,
                         PhasePolicy policy, double pulse_duration) {
  if (n_pi < 1) throw std::invalid_argument("uhrig needs at least one pulse");
  if (!(total_duration > 0.0)) throw std::invalid_argument("total duration must be > 0");
  if (pulse_duration < 0.0) throw std::invalid_argument("pulse duration must be >= 0");

  PulseSequence seq;
  seq.kind = "uhrig";
  seq.tau_arm = 0.0;
  seq.total_duration = total_duration;
  seq.phase_policy = policy;
  seq.pulses.reserve(n_pi);
  for (std::size_t j = 1; j <= n_pi; ++j) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(j) /
                              (2.0 * static_cast<double>(n_pi) + 2.0));
    Pulse p;
    p.time = total_duration * s * s;
    p.rotation_angle = std::numbers::pi;
    p.axis_phase = (policy == PhasePolicy::xy_alternating && j % 2 == 0)
                       ? 0.5 * std::numbers::pi
                       : 0.0;
    p.duration = pulse_duration;
    seq.pulses.push_back(p);
  }
  check_pulse_windows(seq);
  return seq;
}

int toggling_value(const PulseSequence& seq, double t) {
  if (t < 0.0 || t > seq.total_duration) {
    throw std::out_of_range("time outside [0, T]");
  }
  std::size_t flips = 0;
  for (const auto& p : seq.pulses) {
    if (p.time < t) ++flips;
  }
  return flips % 2 == 0 ? 1 : -1;
}

std::vector<double> toggling_breakpoints(const PulseSequence& seq) {
  std::vector<double> b;
  b.reserve(seq.pulses.size() + 2);
  b.push_back(0.0);
  for (const auto& p : seq.pulses) b.push_back(p.time);
  b.push_back(seq.total_duration);
  return b;
}

std::string to_json(const PulseSequence& seq) {
  nlohmann::json j;
  j["type"] = seq.kind;
  j["n_pi"] = seq.n_pi();
  if (seq.kind == "cpmg") {
    j["tau_arm_s"] = seq.tau_arm;
  } else {
    j["total_duration_s"] = seq.total_duration;
  }
  j["phase_policy"] = seq.phase_policy == PhasePolicy::xy_alternating
                          ? "xy_alternating"
                          : "fixed_axis";
  j["pulse_duration_s"] = seq.pulses.empty() ? 0.0 : seq.pulses.front().duration;
  return j.dump();
}

PulseSequence sequence_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const std::string type = j.at("type").get<std::string>();
  const auto n = j.at("n_pi").get<std::size_t>();
  const std::string policy_name = j.value("phase_policy", "fixed_axis");
  const PhasePolicy policy = policy_name == "xy_alternating"
                                 ? PhasePolicy::xy_alternating
                                 : PhasePolicy::fixed_axis;
  const double dur = j.value("pulse_duration_s", 0.0);
  if (type == "cpmg") {
    return make_cpmg(n, j.at("tau_arm_s").get<double>(), policy, dur);
  }
  if (type == "uhrig") {
    return make_uhrig(n, j.at("total_duration_s").get<double>(), policy, dur);
  }
  throw std::invalid_argument("unknown sequence type: " + type);
}

}  // namespace qlockin
