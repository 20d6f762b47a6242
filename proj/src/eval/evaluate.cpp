#include "gaildrive/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "gaildrive/common/error.hpp"
#include "gaildrive/expert/collect.hpp"

namespace gaildrive::eval {

std::string_view to_string(EvalMode m) {
  return m == EvalMode::kStochastic ? "stochastic" : "deterministic";
}

std::optional<EvalMode> parse_eval_mode(std::string_view s) {
  if (s == "stochastic") return EvalMode::kStochastic;
  if (s == "deterministic") return EvalMode::kDeterministic;
  return std::nullopt;
}

PolicyDriver::PolicyDriver(const nn::Network& policy, agent::InputEncoder encoder, agent::Vec2d log_std,
                           EvalMode mode)
    : policy_(policy), encoder_(encoder), log_std_(log_std), mode_(mode) {
  if (policy.input_width() != encoder.policy_width() || policy.output_width() != 3) {
    throw ConfigError("policy network does not match the observation mode");
  }
}

sim::Action PolicyDriver::act(const sim::Environment&, const sim::Observation& obs, Rng& rng) {
  nn::Tensor x({1, encoder_.policy_width()});
  encoder_.encode_policy(encoder_.raw(obs), x.row(0));
  const auto out = policy_.predict(x);
  const auto dist = agent::read_output(out.row(0)).dist(log_std_);
  if (mode_ == EvalMode::kDeterministic) return agent::to_action(agent::deterministic_action(dist));
  return agent::to_action(agent::sample_action(dist, rng).raw);
}

sim::Action ExpertDriver::act(const sim::Environment& env, const sim::Observation&, Rng&) {
  return pid_.act(env.state(), env.route(), env.command());
}

double EvalReport::mean() const {
  if (rewards.empty()) return 0.0;
  return std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
}

double EvalReport::stddev() const {
  if (rewards.empty()) return 0.0;
  const double m = mean();
  double s = 0.0;
  for (double r : rewards) s += (r - m) * (r - m);
  return std::sqrt(s / static_cast<double>(rewards.size()));
}

double EvalReport::max() const {
  return rewards.empty() ? 0.0 : *std::max_element(rewards.begin(), rewards.end());
}

double EvalReport::min() const {
  return rewards.empty() ? 0.0 : *std::min_element(rewards.begin(), rewards.end());
}

EvalReport evaluate(Driver& driver, const sim::RouteSpec& route, const sim::EnvConfig& env_config,
                    const EvalOptions& options, EvalMode mode, Rng& rng) {
  EvalReport report;
  report.mode = mode;
  sim::Environment env(route, env_config);
  for (std::size_t e = 0; e < options.episodes; ++e) {
    auto obs = env.reset_to_start();
    driver.begin_episode();
    EpisodeTrace trace;
    if (options.record_traces) trace.points.push_back({env.state().x, env.state().y, std::nullopt});
    std::size_t crossed = env.crossed();
    for (std::size_t step = 0; options.max_steps == 0 || step < options.max_steps; ++step) {
      const auto r = env.step(driver.act(env, obs, rng));
      crossed = r.dense_crossed_total;
      if (options.record_traces) trace.points.push_back({env.state().x, env.state().y, r.infraction});
      if (r.done()) break;
      obs = r.observation;
    }
    trace.reward = crossed;
    report.rewards.push_back(static_cast<double>(crossed));
    if (options.record_traces) report.traces.push_back(std::move(trace));
  }
  return report;
}

std::size_t default_step_cap(const sim::RouteSpec& route, const sim::EnvConfig& env_config) {
  return 2 * expert::expert_lap_steps(route, {}, env_config);
}

void write_trajectory_dump(const EvalReport& report, std::ostream& out) {
  out << "# gaildrive trajectories mode=" << to_string(report.mode) << " episodes=" << report.traces.size()
      << "\n";
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);
  for (std::size_t k = 0; k < report.traces.size(); ++k) {
    const auto& t = report.traces[k];
    out << "# episode " << k << " reward=" << t.reward << " points=" << t.points.size() << "\n";
    for (const auto& p : t.points) {
      out << p.x << " " << p.y;
      if (p.infraction) out << " " << sim::to_string(*p.infraction);
      out << "\n";
    }
  }
  out.flags(flags);
}

void dump_trajectory(const EvalReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  write_trajectory_dump(report, f);
  if (!f) throw Error("failed writing " + path);
}

EvalReport read_trajectory_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# gaildrive trajectories", 0) != 0) {
    throw FormatError("missing trajectory dump header");
  }
  EvalReport report;
  if (line.find("mode=stochastic") != std::string::npos) report.mode = EvalMode::kStochastic;
  while (std::getline(in, line)) {
    if (line.rfind("# episode", 0) == 0) {
      EpisodeTrace t;
      const auto rp = line.find("reward=");
      if (rp == std::string::npos) throw FormatError("episode line without reward: " + line);
      t.reward = std::stoul(line.substr(rp + 7));
      report.traces.push_back(std::move(t));
      report.rewards.push_back(static_cast<double>(report.traces.back().reward));
      continue;
    }
    if (line.empty()) continue;
    if (report.traces.empty()) throw FormatError("trajectory point before any episode line");
    std::istringstream ls(line);
    TracePoint p;
    if (!(ls >> p.x >> p.y)) throw FormatError("bad trajectory line: " + line);
    std::string kind;
    if (ls >> kind) {
      p.infraction = sim::parse_infraction(kind);
      if (!p.infraction) throw FormatError("unknown infraction label: " + kind);
    }
    report.traces.back().points.push_back(p);
  }
  return report;
}

}  // namespace gaildrive::eval
