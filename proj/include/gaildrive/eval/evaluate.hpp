#ifndef GAILDRIVE_EVAL_EVALUATE_HPP_
#define GAILDRIVE_EVAL_EVALUATE_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaildrive/agent/networks.hpp"
#include "gaildrive/agent/policy.hpp"
#include "gaildrive/common/random.hpp"
#include "gaildrive/expert/pid.hpp"
#include "gaildrive/nn/network.hpp"
#include "gaildrive/sim/environment.hpp"

namespace gaildrive::eval {

enum class EvalMode : std::uint8_t { kStochastic = 0, kDeterministic = 1 };

std::string_view to_string(EvalMode m);
std::optional<EvalMode> parse_eval_mode(std::string_view s);

// Something that drives the car: a learned policy or the PID expert.
class Driver {
 public:
  virtual ~Driver() = default;
  virtual void begin_episode() {}
  virtual sim::Action act(const sim::Environment& env, const sim::Observation& obs, Rng& rng) = 0;
};

class PolicyDriver : public Driver {
 public:
  // Keeps a reference to `policy`; it must outlive the driver.
  PolicyDriver(const nn::Network& policy, agent::InputEncoder encoder, agent::Vec2d log_std,
               EvalMode mode);
  sim::Action act(const sim::Environment& env, const sim::Observation& obs, Rng& rng) override;

 private:
  const nn::Network& policy_;
  agent::InputEncoder encoder_;
  agent::Vec2d log_std_;
  EvalMode mode_;
};

class ExpertDriver : public Driver {
 public:
  explicit ExpertDriver(expert::PidParams params = {}) : pid_(params) {}
  void begin_episode() override { pid_.reset(); }
  sim::Action act(const sim::Environment& env, const sim::Observation& obs, Rng& rng) override;

 private:
  expert::PidExpert pid_;
};

struct TracePoint {
  double x = 0.0;
  double y = 0.0;
  std::optional<sim::InfractionKind> infraction;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct EpisodeTrace {
  std::size_t reward = 0;
  std::vector<TracePoint> points;

  friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

struct EvalReport {
  EvalMode mode = EvalMode::kDeterministic;
  std::vector<double> rewards;
  std::vector<EpisodeTrace> traces;  // filled when requested

  std::size_t episodes() const { return rewards.size(); }
  double mean() const;
  double stddev() const;  // population
  double max() const;
  double min() const;
};

struct EvalOptions {
  std::size_t episodes = 1;
  std::size_t max_steps = 0;  // 0: no cap
  bool record_traces = false;
};

// Runs episodes from the route start. Each ends at completion, at the first
// infraction, or at the step cap; its reward is the dense points crossed.
EvalReport evaluate(Driver& driver, const sim::RouteSpec& route, const sim::EnvConfig& env_config,
                    const EvalOptions& options, EvalMode mode, Rng& rng);

// Step cap used for learned policies: twice the expert's lap.
std::size_t default_step_cap(const sim::RouteSpec& route, const sim::EnvConfig& env_config = {});

// Text dump in the route-dump style:
//   # gaildrive trajectories mode=<m> episodes=<n>
//   # episode <k> reward=<r> points=<p>
//   x y [INFRACTION_KIND]
void write_trajectory_dump(const EvalReport& report, std::ostream& out);
void dump_trajectory(const EvalReport& report, const std::string& path);
EvalReport read_trajectory_dump(std::istream& in);

}  // namespace gaildrive::eval

#endif  // GAILDRIVE_EVAL_EVALUATE_HPP_
