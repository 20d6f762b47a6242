#ifndef GAILDRIVE_TRAIN_TRAINER_HPP_
#define GAILDRIVE_TRAIN_TRAINER_HPP_

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gaildrive/expert/dataset.hpp"
#include "gaildrive/nn/network.hpp"
#include "gaildrive/train/config.hpp"

namespace gaildrive::train {

struct MetricsRow {
  std::size_t update = 0;
  std::size_t env_steps = 0;
  std::optional<double> eval_reward_stoch;
  std::optional<double> eval_reward_det;
  double actor_loss = 0.0;
  double value_loss = 0.0;
  double disc_loss = 0.0;
  double bc_loss = 0.0;
  double alpha = 0.0;
  double gp_penalty = 0.0;
  double wall_clock_s = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "update,env_steps,eval_reward_stoch,eval_reward_det,actor_loss,value_loss,disc_loss,bc_loss,alpha,"
    "gp_penalty,wall_clock_s";

// Fixed-precision CSV line; evaluations that did not run are left empty.
std::string format_metrics_row(const MetricsRow& r);

// Where a run writes its artifacts. Empty fields disable that output.
struct RunPaths {
  std::string metrics_csv;
  std::string checkpoint_dir;
  std::string diagnostics_dir;  // NaN dumps
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
  nn::Network policy;             // final (GAIL) or best-validation (BC) parameters
  std::optional<nn::Network> discriminator;
  double best_eval_det = -1.0;
  // First update whose deterministic evaluation reached stop/threshold.
  std::optional<std::size_t> reached_at_env_steps;
  // max |rho - 1| over the first PPO minibatch of every update.
  double first_minibatch_max_ratio_dev = 0.0;
  std::size_t policy_steps = 0;  // optimizer steps on the policy, all updates
};

// Called after every metrics row; return false to stop early.
using ProgressFn = std::function<bool(const MetricsRow&)>;

// GAIL or BC-GAIL (config.mode) with PPO on the policy and a WGAN-GP critic.
TrainResult train_gail(const TrainConfig& config, const expert::Dataset& dataset, const RunPaths& paths = {},
                       const ProgressFn& progress = {});

// Behavior cloning on a 70/30 split, keeping the best-validation parameters.
// Rows are epochs; env_steps counts expert samples consumed.
TrainResult train_bc(const TrainConfig& config, const expert::Dataset& dataset, const RunPaths& paths = {},
                     const ProgressFn& progress = {});

// Dispatches on config.mode.
TrainResult train(const TrainConfig& config, const expert::Dataset& dataset, const RunPaths& paths = {},
                  const ProgressFn& progress = {});

}  // namespace gaildrive::train

#endif  // GAILDRIVE_TRAIN_TRAINER_HPP_
