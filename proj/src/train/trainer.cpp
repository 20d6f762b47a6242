#include "gaildrive/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "gaildrive/agent/discriminator.hpp"
#include "gaildrive/common/bytes.hpp"
#include "gaildrive/common/error.hpp"
#include "gaildrive/eval/evaluate.hpp"
#include "gaildrive/nn/adam.hpp"
#include "gaildrive/nn/checkpoint.hpp"
#include "gaildrive/train/losses.hpp"
#include "gaildrive/train/rollout.hpp"

namespace gaildrive::train {

namespace fs = std::filesystem;

namespace {

// RNG streams of one run.
constexpr std::uint64_t kPolicyInit = 1;
constexpr std::uint64_t kDiscInit = 2;
constexpr std::uint64_t kSplitStream = 3;
constexpr std::uint64_t kUpdateStream = 0x7570640000;
constexpr std::uint64_t kEvalStream = 0x6576616c0000;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path) {
    if (path.empty()) return;
    if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    out_.open(path, std::ios::trunc);
    if (!out_) throw Error("cannot write metrics file " + path);
    out_ << kMetricsHeader << "\n";
    out_.flush();
  }
  void write(const MetricsRow& r) {
    if (!out_.is_open()) return;
    out_ << format_metrics_row(r) << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

void save_checkpoint(const RunPaths& paths, const std::string& name, std::vector<const nn::Network*> nets) {
  if (paths.checkpoint_dir.empty()) return;
  fs::create_directories(paths.checkpoint_dir);
  write_file((fs::path(paths.checkpoint_dir) / name).string(), nn::save_params(nets));
}

std::string update_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "update_%06zu.gdck", k);
  return buf;
}

[[noreturn]] void numeric_failure(const RunPaths& paths, std::size_t update, const std::string& what,
                                  const nlohmann::json& detail) {
  if (!paths.diagnostics_dir.empty()) {
    fs::create_directories(paths.diagnostics_dir);
    nlohmann::json j = detail;
    j["update"] = update;
    j["what"] = what;
    std::ofstream out(fs::path(paths.diagnostics_dir) / ("nan_update_" + std::to_string(update) + ".json"));
    out << j.dump(2) << "\n";
  }
  throw NumericError("non-finite " + what + " at update " + std::to_string(update));
}

// Rescales all gradients so their global L2 norm is at most max_norm.
void clip_gradients(nn::Network& net, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    for (float g : net.grads(l)) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const auto scale = static_cast<float>(max_norm / norm);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    for (float& g : net.grads(l)) g *= scale;
  }
}

struct Evaluator {
  const sim::RouteSpec& route;
  const TrainConfig& config;
  agent::InputEncoder encoder;
  std::size_t cap;

  std::pair<std::optional<double>, std::optional<double>> run(const nn::Network& policy, std::uint64_t key) const {
    std::optional<double> stoch, det;
    eval::EvalOptions opt;
    opt.max_steps = cap;
    if (config.eval_stoch_episodes > 0) {
      Rng rng = make_rng(config.seed, kEvalStream + 2 * key);
      eval::PolicyDriver d(policy, encoder, config.log_std, eval::EvalMode::kStochastic);
      opt.episodes = config.eval_stoch_episodes;
      stoch = eval::evaluate(d, route, config.env, opt, eval::EvalMode::kStochastic, rng).mean();
    }
    if (config.eval_det_episodes > 0) {
      Rng rng = make_rng(config.seed, kEvalStream + 2 * key + 1);
      eval::PolicyDriver d(policy, encoder, config.log_std, eval::EvalMode::kDeterministic);
      opt.episodes = config.eval_det_episodes;
      det = eval::evaluate(d, route, config.env, opt, eval::EvalMode::kDeterministic, rng).mean();
    }
    return {stoch, det};
  }
};

void check_dataset(const expert::Dataset& dataset, const agent::InputEncoder& encoder) {
  if (dataset.size() == 0) throw ConfigError("expert dataset is empty");
  if (dataset.input_width() != encoder.raw_width()) {
    throw ConfigError("dataset observation width " + std::to_string(dataset.input_width()) +
                      " does not match obs_mode " + std::string(agent::to_string(encoder.mode())));
  }
}

// Bookkeeping shared by both loops: best evaluation, early stop, checkpoints.
struct Progress {
  const TrainConfig& config;
  const RunPaths& paths;
  double max_reward;
  TrainResult& result;

  bool reached(const MetricsRow& row) {
    if (!row.eval_reward_det || config.stop_at_fraction <= 0.0) return false;
    if (*row.eval_reward_det + 1e-9 < config.stop_at_fraction * max_reward) return false;
    if (!result.reached_at_env_steps) result.reached_at_env_steps = row.env_steps;
    return true;
  }
};

}  // namespace

std::string format_metrics_row(const MetricsRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  return std::to_string(r.update) + "," + std::to_string(r.env_steps) + "," + opt(r.eval_reward_stoch) + "," +
         opt(r.eval_reward_det) + "," + fmt(r.actor_loss) + "," + fmt(r.value_loss) + "," + fmt(r.disc_loss) +
         "," + fmt(r.bc_loss) + "," + fmt(r.alpha) + "," + fmt(r.gp_penalty) + "," + fmt(r.wall_clock_s);
}

TrainResult train_gail(const TrainConfig& config, const expert::Dataset& dataset, const RunPaths& paths,
                       const ProgressFn& progress) {
  config.validate();
  if (config.mode == TrainMode::kBc) throw ConfigError("train_gail needs mode gail or bc_gail");
  const bool blend = config.mode == TrainMode::kBcGail;
  const agent::InputEncoder encoder(config.obs_mode, config.scaling);
  check_dataset(dataset, encoder);

  const sim::RouteSpec route = config.route.build();
  const Evaluator evaluator{route, config, encoder,
                            config.eval_step_cap ? config.eval_step_cap : eval::default_step_cap(route, config.env)};
  const auto max_reward = static_cast<double>(route.dense_points.size());

  TrainResult result;
  result.policy = agent::build_actor_critic(config.obs_mode, derive_seed(config.seed, kPolicyInit));
  result.discriminator = agent::build_discriminator(config.obs_mode, derive_seed(config.seed, kDiscInit));
  nn::Network& policy = result.policy;
  nn::Network& disc = *result.discriminator;
  nn::Adam policy_opt(policy, {.lr = config.lr});
  nn::Adam disc_opt(disc, {.lr = config.disc_lr});

  VecEnv envs(route, config.env, config.n_envs, config.seed);
  std::vector<std::size_t> all_expert(dataset.size());
  std::iota(all_expert.begin(), all_expert.end(), std::size_t{0});

  MetricsWriter metrics(paths.metrics_csv);
  Progress tracker{config, paths, max_reward, result};
  save_checkpoint(paths, update_name(0), {&policy, &disc});
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t T = config.timesteps_per_update();
  const std::size_t m = config.minibatch;
  std::size_t env_steps = 0;

  for (std::size_t k = 0; k < config.total_updates; ++k) {
    Rng rng = make_rng(config.seed, kUpdateStream + k);
    const double alpha = blend ? alpha_schedule(config.alpha0, config.alpha_decay, k) : 0.0;
    MetricsRow row;
    row.update = k;
    row.alpha = alpha;

    // (1) Rollout under frozen snapshots; rewards from the current critic.
    TransitionBatch batch = collect_rollout(policy, encoder, envs, config.steps_per_actor,
                                            {.log_std = config.log_std, .threads = config.threads});
    assign_rewards(batch, disc, encoder, config.reward_transform);
    env_steps += T;
    row.env_steps = env_steps;

    std::vector<double> advantages(T), returns(T);
    for (std::size_t e = 0; e < config.n_envs; ++e) {
      const std::size_t off = e * config.steps_per_actor;
      const std::size_t len = config.steps_per_actor;
      const auto g = gae(std::span(batch.rewards).subspan(off, len), std::span(batch.value_old).subspan(off, len),
                         std::span(batch.dones).subspan(off, len), batch.bootstrap[e], config.gamma,
                         config.gae_lambda);
      std::copy(g.advantages.begin(), g.advantages.end(), advantages.begin() + static_cast<std::ptrdiff_t>(off));
      std::copy(g.returns.begin(), g.returns.end(), returns.begin() + static_cast<std::ptrdiff_t>(off));
    }
    advantages = standardize(advantages);

    // (2) One critic pass over the rollout.
    const nn::Tensor policy_rows = disc_rows(batch, encoder);
    std::vector<std::size_t> order(T);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t disc_steps = 0;
    for (std::size_t start = 0; start < T; start += m) {
      nn::Tensor p({m, encoder.disc_width()});
      for (std::size_t r = 0; r < m; ++r) {
        const auto src = policy_rows.row(order[start + r]);
        std::copy(src.begin(), src.end(), p.row(r).begin());
      }
      const auto eb = expert::sample_batch(dataset, all_expert, m, rng);
      const nn::Tensor e = encoder.disc_batch(eb.inputs, eb.actions);
      agent::DiscLossResult dl;
      try {
        dl = agent::disc_loss(disc, e, p, config.gp_coef, config.gp_eps, rng, config.gp_direction);
      } catch (const NumericError&) {
        numeric_failure(paths, k, "discriminator loss", {{"minibatch", disc_steps}});
      }
      clip_gradients(disc, config.max_grad_norm);
      disc_opt.step(disc);
      row.disc_loss += dl.loss;
      row.gp_penalty += dl.penalty;
      ++disc_steps;
    }
    row.disc_loss /= static_cast<double>(disc_steps);
    row.gp_penalty /= static_cast<double>(disc_steps);

    // (3) K epochs of PPO; the blended mode stacks an expert minibatch under
    // the policy rows so both terms share one forward/backward.
    const std::size_t rows_per_step = blend ? 2 * m : m;
    std::size_t policy_steps = 0;
    bool first = true;
    for (std::size_t epoch = 0; epoch < config.ppo_epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < T; start += m) {
        nn::Tensor in({rows_per_step, encoder.policy_width()});
        for (std::size_t r = 0; r < m; ++r) encoder.encode_policy(batch.raw.row(order[start + r]), in.row(r));
        expert::Batch eb;
        if (blend) {
          eb = expert::sample_batch(dataset, all_expert, m, rng);
          for (std::size_t r = 0; r < m; ++r) encoder.encode_policy(eb.inputs.row(r), in.row(m + r));
        }
        policy.zero_grad();
        const nn::Tensor& out = policy.forward(in);
        nn::Tensor grad({rows_per_step, out.cols()});
        const double inv_m = 1.0 / static_cast<double>(m);
        double surrogate = 0.0, sq_err = 0.0, bc = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          const std::size_t i = order[start + r];
          const auto o = agent::read_output(out.row(r));
          const auto d = o.dist(config.log_std);
          const double rho = std::exp(agent::log_prob(d, batch.actions[i]) - batch.log_prob_old[i]);
          if (first) result.first_minibatch_max_ratio_dev = std::max(result.first_minibatch_max_ratio_dev, std::abs(rho - 1.0));
          surrogate += clipped_surrogate(rho, advantages[i], config.clip);
          const double g = clipped_surrogate_grad(rho, advantages[i], config.clip);
          const auto dmu = agent::log_prob_mean_grad(d, batch.actions[i]);
          const double coef = -(1.0 - alpha) * g * rho * inv_m;
          grad(r, 0) = static_cast<float>(coef * dmu[0]);
          grad(r, 1) = static_cast<float>(coef * dmu[1]);
          const double err = o.value - returns[i];
          sq_err += err * err;
          grad(r, 2) = static_cast<float>(config.value_coef * 2.0 * err * inv_m);
        }
        if (blend) {
          for (std::size_t r = 0; r < m; ++r) {
            const auto d = agent::read_output(out.row(m + r)).dist(config.log_std);
            const agent::Vec2d a{eb.actions(r, 0), eb.actions(r, 1)};
            bc -= agent::log_prob(d, a);
            const auto dmu = agent::log_prob_mean_grad(d, a);
            grad(m + r, 0) = static_cast<float>(-alpha * inv_m * dmu[0]);
            grad(m + r, 1) = static_cast<float>(-alpha * inv_m * dmu[1]);
          }
        }
        const double actor = -surrogate * inv_m;
        const double value = sq_err * inv_m;
        if (!std::isfinite(actor) || !std::isfinite(value) || !std::isfinite(bc)) {
          numeric_failure(paths, k, "policy loss",
                          {{"epoch", epoch}, {"minibatch_start", start}, {"actor_loss", actor},
                           {"value_loss", value}, {"bc_loss", bc * inv_m}});
        }
        policy.backward(grad);
        clip_gradients(policy, config.max_grad_norm);
        policy_opt.step(policy);
        row.actor_loss += actor;
        row.value_loss += value;
        row.bc_loss += bc * inv_m;
        ++policy_steps;
        ++result.policy_steps;
        first = false;
      }
    }
    row.actor_loss /= static_cast<double>(policy_steps);
    row.value_loss /= static_cast<double>(policy_steps);
    row.bc_loss /= static_cast<double>(policy_steps);
    policy.clear_cache();

    // (4) Evaluation on a separate environment.
    if ((k + 1) % config.eval_every == 0 || k + 1 == config.total_updates) {
      std::tie(row.eval_reward_stoch, row.eval_reward_det) = evaluator.run(policy, k);
    }
    if (config.record_wall_clock) {
      row.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    metrics.write(row);
    result.metrics.push_back(row);

    if (row.eval_reward_det && *row.eval_reward_det > result.best_eval_det) {
      result.best_eval_det = *row.eval_reward_det;
      save_checkpoint(paths, "best.gdck", {&policy, &disc});
    }
    if (config.checkpoint_every > 0 && (k + 1) % config.checkpoint_every == 0) {
      save_checkpoint(paths, update_name(k + 1), {&policy, &disc});
    }
    const bool stop = tracker.reached(row);
    if (progress && !progress(row)) break;
    if (stop) break;
  }
  if (!result.metrics.empty()) save_checkpoint(paths, "final.gdck", {&policy, &disc});
  return result;
}

TrainResult train_bc(const TrainConfig& config, const expert::Dataset& dataset, const RunPaths& paths,
                     const ProgressFn& progress) {
  config.validate();
  const agent::InputEncoder encoder(config.obs_mode, config.scaling);
  check_dataset(dataset, encoder);

  const sim::RouteSpec route = config.route.build();
  const Evaluator evaluator{route, config, encoder,
                            config.eval_step_cap ? config.eval_step_cap : eval::default_step_cap(route, config.env)};

  TrainResult result;
  result.policy = agent::build_actor_critic(config.obs_mode, derive_seed(config.seed, kPolicyInit));
  nn::Network& policy = result.policy;
  nn::Adam opt(policy, {.lr = config.bc_lr});

  // Tiny datasets can leave a side of the split empty; fall back to all samples.
  auto split = expert::split_samples(dataset.size(), derive_seed(config.seed, kSplitStream), config.train_fraction);
  if (split.train.empty()) split.train = split.validation;
  if (split.validation.empty()) split.validation = split.train;
  const expert::Batch val = expert::gather(dataset, split.validation);
  const nn::Tensor val_in = encoder.policy_batch(val.inputs);

  auto mean_bc = [&](const nn::Tensor& out, const nn::Tensor& actions) {
    double s = 0.0;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      s -= agent::log_prob(agent::read_output(out.row(r)).dist(config.log_std), {actions(r, 0), actions(r, 1)});
    }
    return s / static_cast<double>(out.rows());
  };

  MetricsWriter metrics(paths.metrics_csv);
  Progress tracker{config, paths, static_cast<double>(route.dense_points.size()), result};
  save_checkpoint(paths, update_name(0), {&policy});
  const auto t0 = std::chrono::steady_clock::now();

  nn::Network best = policy;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order = split.train;
  std::size_t consumed = 0;

  for (std::size_t epoch = 0; epoch < config.bc_epochs; ++epoch) {
    Rng rng = make_rng(config.seed, kUpdateStream + epoch);
    std::shuffle(order.begin(), order.end(), rng);
    MetricsRow row;
    row.update = epoch;
    row.alpha = 1.0;
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.bc_batch) {
      const std::size_t len = std::min(config.bc_batch, order.size() - start);
      const auto b = expert::gather(dataset, std::span(order).subspan(start, len));
      policy.zero_grad();
      const nn::Tensor& out = policy.forward(encoder.policy_batch(b.inputs));
      nn::Tensor grad({len, out.cols()});
      double loss = 0.0;
      for (std::size_t r = 0; r < len; ++r) {
        const auto d = agent::read_output(out.row(r)).dist(config.log_std);
        const agent::Vec2d a{b.actions(r, 0), b.actions(r, 1)};
        loss -= agent::log_prob(d, a);
        const auto dmu = agent::log_prob_mean_grad(d, a);
        grad(r, 0) = static_cast<float>(-dmu[0] / static_cast<double>(len));
        grad(r, 1) = static_cast<float>(-dmu[1] / static_cast<double>(len));
      }
      if (!std::isfinite(loss)) numeric_failure(paths, epoch, "behavior cloning loss", {{"batch_start", start}});
      policy.backward(grad);
      clip_gradients(policy, config.max_grad_norm);
      opt.step(policy);
      ++result.policy_steps;
      train_loss += loss;
      consumed += len;
    }
    policy.clear_cache();
    row.env_steps = consumed;
    row.actor_loss = train_loss / static_cast<double>(order.size());
    row.bc_loss = mean_bc(policy.predict(val_in), val.actions);
    if (row.bc_loss < best_val) {
      best_val = row.bc_loss;
      best = policy;
    }
    if ((epoch + 1) % config.eval_every == 0 || epoch + 1 == config.bc_epochs) {
      std::tie(row.eval_reward_stoch, row.eval_reward_det) = evaluator.run(policy, epoch);
    }
    if (config.record_wall_clock) {
      row.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    metrics.write(row);
    result.metrics.push_back(row);
    if (config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0) {
      save_checkpoint(paths, update_name(epoch + 1), {&policy});
    }
    const bool stop = tracker.reached(row);
    if (progress && !progress(row)) break;
    if (stop) break;
  }

  // The retained network is the best on validation, not the last one.
  result.policy = std::move(best);
  if (config.eval_det_episodes > 0) {
    result.best_eval_det = *evaluator.run(result.policy, config.bc_epochs + 1).second;
  }
  if (!result.metrics.empty()) {
    save_checkpoint(paths, "best.gdck", {&result.policy});
    save_checkpoint(paths, "final.gdck", {&result.policy});
  }
  return result;
}

TrainResult train(const TrainConfig& config, const expert::Dataset& dataset, const RunPaths& paths,
                  const ProgressFn& progress) {
  return config.mode == TrainMode::kBc ? train_bc(config, dataset, paths, progress)
                                       : train_gail(config, dataset, paths, progress);
}

}  // namespace gaildrive::train
