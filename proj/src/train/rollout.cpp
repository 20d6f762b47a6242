#include "gaildrive/train/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "gaildrive/agent/discriminator.hpp"
#include "gaildrive/common/error.hpp"

namespace gaildrive::train {

namespace {

constexpr std::uint64_t kEnvStream = 0x656e76;  // "env"
constexpr std::size_t kRewardChunk = 1024;

// Runs fn(i) for i in [0, n), split across up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) fn(i);
    });
  }
}

}  // namespace

VecEnv::VecEnv(const sim::RouteSpec& route, const sim::EnvConfig& config, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("VecEnv needs at least one environment");
  for (std::size_t i = 0; i < n; ++i) {
    envs_.emplace_back(route, config);
    rngs_.push_back(make_rng(seed, kEnvStream + i));
    obs_.push_back(envs_.back().reset(rngs_.back()));
  }
}

TransitionBatch collect_rollout(const nn::Network& policy, const agent::InputEncoder& encoder, VecEnv& envs,
                                std::size_t steps, const RolloutOptions& options) {
  const std::size_t n = envs.size();
  const std::size_t width = encoder.raw_width();
  if (policy.input_width() != encoder.policy_width()) throw ConfigError("policy input width mismatch");
  TransitionBatch b;
  b.n_envs = n;
  b.steps = steps;
  const std::size_t total = n * steps;
  b.raw = nn::Tensor({std::max<std::size_t>(total, 1), width});
  b.actions.resize(total);
  b.log_prob_old.resize(total);
  b.value_old.resize(total);
  b.rewards.assign(total, 0.0);
  b.dones.assign(total, 0);
  b.env_index.resize(total);
  b.bootstrap.resize(n);

  nn::Tensor raw({n, width});
  std::vector<std::uint8_t> done_now(n);
  auto fill_raw = [&] {
    for (std::size_t e = 0; e < n; ++e) {
      const auto r = encoder.raw(envs.observation(e));
      std::copy(r.begin(), r.end(), raw.row(e).begin());
    }
  };

  for (std::size_t t = 0; t < steps; ++t) {
    fill_raw();
    const nn::Tensor out = policy.predict(encoder.policy_batch(raw));
    for (std::size_t e = 0; e < n; ++e) {
      const std::size_t i = e * steps + t;
      const auto o = agent::read_output(out.row(e));
      const auto s = agent::sample_action(o.dist(options.log_std), envs.rng(e));
      std::copy(raw.row(e).begin(), raw.row(e).end(), b.raw.row(i).begin());
      b.actions[i] = s.raw;
      b.log_prob_old[i] = s.log_prob;
      b.value_old[i] = o.value;
      b.env_index[i] = e;
    }
    parallel_for(n, options.threads, [&](std::size_t e) {
      auto& env = envs.env(e);
      auto r = env.step(agent::to_action(b.actions[e * steps + t]));
      done_now[e] = r.done() ? 1 : 0;
      envs.set_observation(e, r.done() ? env.reset(envs.rng(e)) : std::move(r.observation));
    });
    for (std::size_t e = 0; e < n; ++e) {
      b.dones[e * steps + t] = done_now[e];
      b.episodes_finished += done_now[e];
    }
  }

  fill_raw();
  const nn::Tensor out = policy.predict(encoder.policy_batch(raw));
  for (std::size_t e = 0; e < n; ++e) b.bootstrap[e] = agent::read_output(out.row(e)).value;
  return b;
}

nn::Tensor disc_rows(const TransitionBatch& batch, const agent::InputEncoder& encoder) {
  const std::size_t n = batch.size();
  nn::Tensor rows({std::max<std::size_t>(n, 1), encoder.disc_width()});
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = agent::to_action(batch.actions[i]).clamped();
    encoder.encode_disc(batch.raw.row(i), a.steer, a.throttle, rows.row(i));
  }
  return rows;
}

std::string_view to_string(RewardTransform t) { return t == RewardTransform::kSigmoid ? "sigmoid" : "linear"; }

std::optional<RewardTransform> parse_reward_transform(std::string_view s) {
  if (s == "linear") return RewardTransform::kLinear;
  if (s == "sigmoid") return RewardTransform::kSigmoid;
  return std::nullopt;
}

void assign_rewards(TransitionBatch& batch, const nn::Network& disc, const agent::InputEncoder& encoder,
                    RewardTransform transform) {
  const std::size_t n = batch.size();
  const std::size_t width = encoder.disc_width();
  for (std::size_t start = 0; start < n; start += kRewardChunk) {
    const std::size_t len = std::min(kRewardChunk, n - start);
    nn::Tensor rows({len, width});
    for (std::size_t k = 0; k < len; ++k) {
      const auto a = agent::to_action(batch.actions[start + k]).clamped();
      encoder.encode_disc(batch.raw.row(start + k), a.steer, a.throttle, rows.row(k));
    }
    const auto r = agent::disc_rewards(disc, rows);
    for (std::size_t k = 0; k < len; ++k) {
      batch.rewards[start + k] = transform == RewardTransform::kSigmoid ? 1.0 / (1.0 + std::exp(-r[k])) : r[k];
    }
  }
}

}  // namespace gaildrive::train
