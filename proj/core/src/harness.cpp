#include "iher/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "iher/checkpoint.hpp"

namespace iher {

std::string metrics_csv_header() {
  return "epoch,real_steps_total,imag_steps_total,eval_success_rate,mean_intrinsic_reward,model_loss,p_imag,"
         "wall_clock_seconds";
}

std::string metrics_csv_row(const MetricsRow& r) {
  std::string out;
  out += std::to_string(r.epoch);
  out += "," + std::to_string(r.real_steps_total);
  out += "," + std::to_string(r.imag_steps_total);
  out += "," + format_double(r.eval_success_rate);
  out += "," + format_double(r.mean_intrinsic_reward);
  out += "," + format_double(r.model_loss);
  out += "," + format_double(r.p_imag);
  out += "," + format_double(r.wall_clock_seconds);
  return out;
}

double evaluate(const ActionFn& policy, GoalEnv& env, int n_episodes, std::uint64_t seed) {
  int successes = 0;
  for (int e = 0; e < n_episodes; ++e) {
    GoalObservation gobs = env.reset(mix_seed(seed, 0x6576616c, static_cast<std::uint64_t>(e)));
    StepResult res;
    for (int t = 0; t < env.spec().episode_length; ++t) {
      res = env.step(policy(gobs));
      gobs = res.obs;
    }
    if (env.is_success(gobs.achieved_goal, gobs.desired_goal)) ++successes;
  }
  return static_cast<double>(successes) / n_episodes;
}

double evaluate(const FrozenPolicy& policy, GoalEnv& env, int n_episodes, std::uint64_t seed,
                double env_is_real_bit) {
  Rng unused = make_rng(0);
  return evaluate(
      [&](const GoalObservation& gobs) { return policy.select_action(gobs, env_is_real_bit, false, unused); }, env,
      n_episodes, seed);
}

namespace {

AgentConfig agent_config_from(const TrainConfig& c) {
  AgentConfig a;
  a.actor_hidden = c.actor_hidden;
  a.critic_hidden = c.critic_hidden;
  a.gamma = c.gamma;
  a.polyak = c.polyak;
  a.actor_lr = c.actor_lr;
  a.critic_lr = c.critic_lr;
  a.noise_std = c.action_noise_std;
  a.random_action_prob = c.random_action_prob;
  a.action_penalty = c.action_penalty;
  a.normalizer_clip = c.normalizer_clip;
  a.intrinsic_clip = c.intrinsic_clip;
  a.force_real_bit = c.ablation == "no_distinguish";
  return a;
}

}  // namespace

Trainer::Trainer(const TrainConfig& config)
    : cfg_(config),
      env_(make_env(config.task, {config.episode_length, config.success_tolerance})),
      agent_(env_->spec().obs_dim, env_->spec().goal_dim, env_->spec().action_dim, agent_config_from(config),
             mix_seed(config.seed, 0x6167656e)),
      real_buf_(config.real_buffer_capacity, config.episode_length),
      imag_buf_(config.imag_buffer_capacity, config.episode_length),
      rng_collect_(make_rng(mix_seed(config.seed, 0x636f6c6c))),
      rng_model_(make_rng(mix_seed(config.seed, 0x6d6f646c))),
      rng_rollout_(make_rng(mix_seed(config.seed, 0x726f6c6c))),
      rng_sample_(make_rng(mix_seed(config.seed, 0x73616d70))) {
  if (model_based()) {
    ensemble_ = make_ensemble(cfg_.ensemble_size, env_->spec().obs_dim, env_->spec().action_dim, cfg_.model_hidden,
                              cfg_.model_lr, mix_seed(cfg_.seed, 0x656e736d));
  }
}

double Trainer::intrinsic_scale_effective() const {
  return cfg_.ablation == "no_intrinsic" ? 0.0 : cfg_.intrinsic_scale;
}

int Trainer::worker_count() const {
  if (cfg_.rollout_workers > 0) return cfg_.rollout_workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(hw == 0 ? 1 : std::min(hw, 4u));
}

bool Trainer::finished() const { return epochs_completed_ >= cfg_.epochs || early_stopped_; }

void Trainer::collect_real_episodes() {
  const int epoch = epochs_completed_ + 1;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int r = 0; r < cfg_.real_episodes_per_epoch; ++r) {
    const std::uint64_t ep_seed = rng_collect_();
    // the flip affects only the bit fed to the policy; stored transitions keep
    // their true is_real flag
    const bool flip = model_based() && coin(rng_collect_) < cfg_.flip_fraction;
    const double bit_fed = flip ? 0.0 : 1.0;

    GoalObservation gobs = env_->reset(ep_seed);
    initial_obs_.push_back(gobs.observation);
    Episode ep;
    ep.epoch_collected = epoch;
    ep.policy_id = 0;
    ep.is_real = true;
    ep.transitions.reserve(static_cast<std::size_t>(cfg_.episode_length));
    for (int t = 0; t < cfg_.episode_length; ++t) {
      Transition tr;
      tr.obs = gobs;
      tr.action = agent_.select_action(gobs, bit_fed, /*explore=*/true, rng_collect_);
      StepResult res = env_->step(tr.action);
      tr.next_obs = res.obs;
      tr.extrinsic_reward = res.reward;
      tr.is_real = true;
      tr.epoch_collected = epoch;
      gobs = res.obs;
      ep.transitions.push_back(std::move(tr));
    }
    agent_.observe_real_episode(ep);
    real_buf_.store_episode(std::move(ep));
    real_steps_total_ += cfg_.episode_length;
  }
}

void Trainer::run_epoch() {
  if (finished()) throw std::runtime_error("run_epoch: training already finished");
  const auto t0 = std::chrono::steady_clock::now();
  const int epoch = epochs_completed_ + 1;
  epoch_intrinsic_sum_ = 0.0;
  epoch_intrinsic_count_ = 0;

  collect_real_episodes();

  if (model_based()) {
    const ModelTrainReport report = train_models(*ensemble_, real_buf_, cfg_.model_train_steps,
                                                 cfg_.model_batch_size, epoch, cfg_.model_bias, rng_model_,
                                                 worker_count());
    counters_.model_train_calls += 1;
    last_model_loss_ = report.mean_loss_end;

    if (cfg_.ablation != "no_regen") {
      ImagRolloutRequest req;
      req.explore = true;
      req.flip_fraction = cfg_.flip_fraction;
      req.epoch_tag = epoch;
      req.workers = worker_count();
      const std::size_t regenerated =
          regenerate_imag_buffer(*ensemble_, imag_buf_, snapshots_, agent_.freeze(0),
                                 cfg_.cycles * cfg_.imag_episodes_per_cycle, initial_obs_, *env_, req, rng_rollout_);
      counters_.regen_invocations += 1;
      counters_.imag_episodes_generated += static_cast<long>(regenerated);
    }
  }

  const CuriosityConfig curiosity{intrinsic_scale_effective(), cfg_.intrinsic_clip, cfg_.curiosity_raw_space};
  for (int c = 0; c < cfg_.cycles; ++c) {
    if (model_based()) {
      ImagRolloutRequest req;
      req.episode_count = cfg_.imag_episodes_per_cycle;
      req.explore = true;
      req.flip_fraction = cfg_.flip_fraction;
      req.epoch_tag = epoch;
      req.workers = worker_count();
      auto episodes = rollout_imaginary(*ensemble_, agent_.freeze(0), initial_obs_, *env_, req, rng_rollout_);
      for (Episode& ep : episodes) {
        imag_buf_.store_episode(std::move(ep));
        imag_steps_total_ += cfg_.episode_length;
      }
      counters_.imag_episodes_generated += cfg_.imag_episodes_per_cycle;
    }

    for (int n = 0; n < cfg_.batches_per_cycle; ++n) {
      auto batch = dual_sample(real_buf_, imag_buf_, cfg_.batch_size, rng_sample_);
      her_relabel(batch, cfg_.replay_k, cfg_.success_tolerance, rng_sample_);
      if (model_based() && intrinsic_scale_effective() > 0.0) {
        const auto bonuses = augment_batch_rewards(batch, *ensemble_, curiosity);
        counters_.curiosity_batches += 1;
        for (double b : bonuses) epoch_intrinsic_sum_ += b;
        epoch_intrinsic_count_ += static_cast<long long>(bonuses.size());
      }
      agent_.update(batch);
    }

    global_cycle_ += 1;
    if (model_based()) {
      const FrozenPolicy candidate = agent_.freeze(next_snapshot_id_);
      if (snapshot_policy(snapshots_, candidate, global_cycle_, cfg_.snapshot_cadence)) next_snapshot_id_ += 1;
    }
  }

  const double eval_rate = evaluate_current_policy(epoch);

  const auto t1 = std::chrono::steady_clock::now();
  elapsed_seconds_ += std::chrono::duration<double>(t1 - t0).count();

  MetricsRow row;
  row.epoch = epoch;
  row.real_steps_total = real_steps_total_;
  row.imag_steps_total = imag_steps_total_;
  row.eval_success_rate = eval_rate;
  row.mean_intrinsic_reward =
      epoch_intrinsic_count_ > 0 ? epoch_intrinsic_sum_ / static_cast<double>(epoch_intrinsic_count_) : 0.0;
  row.model_loss = last_model_loss_;
  row.p_imag = p_imag(real_buf_, imag_buf_);
  row.wall_clock_seconds = cfg_.record_wall_clock ? elapsed_seconds_ : 0.0;
  metrics_.push_back(row);

  epochs_completed_ += 1;
  if (cfg_.early_stop_success > 0.0 && eval_rate >= cfg_.early_stop_success) early_stopped_ = true;
}

double Trainer::evaluate_current_policy(int epoch) const {
  return evaluate(agent_.freeze(0), *env_, cfg_.eval_episodes,
                  mix_seed(cfg_.seed, 0x6576616c7365ULL, static_cast<std::uint64_t>(epoch)));
}

TrainResult Trainer::run(const std::string& out_dir) {
  TrainResult result;
  std::ofstream csv;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    result.metrics_path = out_dir + "/metrics.csv";
    csv.open(result.metrics_path, std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot open metrics file: " + result.metrics_path);
    csv << metrics_csv_header() << "\n";
    csv.flush();
  }

  while (!finished()) {
    run_epoch();
    if (csv.is_open()) {
      csv << metrics_csv_row(metrics_.back()) << "\n";
      csv.flush();
    }
  }

  if (!out_dir.empty()) {
    result.checkpoint_path = out_dir + "/checkpoint.iher";
    save_checkpoint(result.checkpoint_path);
  }
  result.metrics = metrics_;
  result.counters = counters_;
  return result;
}

TrainResult train(const TrainConfig& config, const std::string& out_dir) {
  Trainer trainer(config);
  return trainer.run(out_dir);
}

void Trainer::save_checkpoint(const std::string& path) const {
  std::vector<std::pair<std::string, std::string>> sections;

  {
    ByteWriter w;
    w.str(config_to_text(cfg_));
    sections.emplace_back("CONF", std::move(w.buf));
  }
  {
    ByteWriter w;
    put_mlp(w, agent_.actor());
    put_mlp(w, agent_.critic());
    put_mlp(w, agent_.target_actor());
    put_mlp(w, agent_.target_critic());
    put_adam(w, agent_.actor_adam());
    put_adam(w, agent_.critic_adam());
    put_running_normalizer(w, agent_.obs_normalizer());
    put_running_normalizer(w, agent_.goal_normalizer());
    sections.emplace_back("AGNT", std::move(w.buf));
  }
  {
    ByteWriter w;
    w.i64(ensemble_.has_value() ? 1 : 0);
    if (ensemble_) {
      w.i64(ensemble_->state_dim);
      w.i64(ensemble_->action_dim);
      w.i64(ensemble_->train_calls);
      w.u64(ensemble_->members.size());
      for (const Mlp& m : ensemble_->members) put_mlp(w, m);
      for (const AdamState& a : ensemble_->adam_states) put_adam(w, a);
      put_normalizer(w, ensemble_->input_norm);
      put_normalizer(w, ensemble_->delta_norm);
    }
    sections.emplace_back("ENSM", std::move(w.buf));
  }
  {
    ByteWriter w;
    put_buffer(w, real_buf_);
    sections.emplace_back("RBUF", std::move(w.buf));
  }
  {
    ByteWriter w;
    put_buffer(w, imag_buf_);
    sections.emplace_back("IBUF", std::move(w.buf));
  }
  {
    ByteWriter w;
    w.u64(snapshots_.snapshots.size());
    for (const FrozenPolicy& p : snapshots_.snapshots) put_frozen_policy(w, p);
    sections.emplace_back("SNAP", std::move(w.buf));
  }
  {
    ByteWriter w;
    w.u64(initial_obs_.size());
    for (const auto& o : initial_obs_) w.vec(o);
    sections.emplace_back("INIT", std::move(w.buf));
  }
  {
    ByteWriter w;
    w.i64(epochs_completed_);
    w.i64(global_cycle_);
    w.i64(next_snapshot_id_);
    w.i64(real_steps_total_);
    w.i64(imag_steps_total_);
    w.f64(last_model_loss_);
    w.i64(early_stopped_ ? 1 : 0);
    w.f64(elapsed_seconds_);
    w.i64(counters_.model_train_calls);
    w.i64(counters_.regen_invocations);
    w.i64(counters_.imag_episodes_generated);
    w.i64(counters_.curiosity_batches);
    sections.emplace_back("CTRS", std::move(w.buf));
  }
  {
    ByteWriter w;
    w.str(rng_to_string(rng_collect_));
    w.str(rng_to_string(rng_model_));
    w.str(rng_to_string(rng_rollout_));
    w.str(rng_to_string(rng_sample_));
    sections.emplace_back("RNGS", std::move(w.buf));
  }
  {
    ByteWriter w;
    w.u64(metrics_.size());
    for (const MetricsRow& r : metrics_) {
      w.i64(r.epoch);
      w.i64(r.real_steps_total);
      w.i64(r.imag_steps_total);
      w.f64(r.eval_success_rate);
      w.f64(r.mean_intrinsic_reward);
      w.f64(r.model_loss);
      w.f64(r.p_imag);
      w.f64(r.wall_clock_seconds);
    }
    sections.emplace_back("METR", std::move(w.buf));
  }

  write_checkpoint_file(path, sections);
}

std::unique_ptr<Trainer> Trainer::load_checkpoint(const std::string& path) {
  auto sections = read_checkpoint_file(path);
  const auto need = [&](const std::string& name) -> const std::string& {
    const auto it = sections.find(name);
    if (it == sections.end()) throw std::runtime_error("checkpoint missing section '" + name + "': " + path);
    return it->second;
  };

  ByteReader conf(need("CONF"));
  const TrainConfig cfg = finalize_config(parse_config_text(conf.str()));
  auto trainer = std::make_unique<Trainer>(cfg);

  {
    ByteReader r(need("AGNT"));
    trainer->agent_.actor() = get_mlp(r);
    trainer->agent_.critic() = get_mlp(r);
    trainer->agent_.target_actor() = get_mlp(r);
    trainer->agent_.target_critic() = get_mlp(r);
    trainer->agent_.actor_adam() = get_adam(r);
    trainer->agent_.critic_adam() = get_adam(r);
    trainer->agent_.obs_normalizer() = get_running_normalizer(r);
    trainer->agent_.goal_normalizer() = get_running_normalizer(r);
  }
  {
    ByteReader r(need("ENSM"));
    const bool has = r.i64() != 0;
    if (has) {
      EnsembleModel ens;
      ens.state_dim = static_cast<int>(r.i64());
      ens.action_dim = static_cast<int>(r.i64());
      ens.train_calls = static_cast<int>(r.i64());
      const std::uint64_t k = r.u64();
      for (std::uint64_t i = 0; i < k; ++i) ens.members.push_back(get_mlp(r));
      for (std::uint64_t i = 0; i < k; ++i) ens.adam_states.push_back(get_adam(r));
      ens.input_norm = get_normalizer(r);
      ens.delta_norm = get_normalizer(r);
      trainer->ensemble_ = std::move(ens);
    } else {
      trainer->ensemble_.reset();
    }
  }
  {
    ByteReader r(need("RBUF"));
    trainer->real_buf_ = get_buffer(r);
  }
  {
    ByteReader r(need("IBUF"));
    trainer->imag_buf_ = get_buffer(r);
  }
  {
    ByteReader r(need("SNAP"));
    const std::uint64_t n = r.u64();
    trainer->snapshots_.snapshots.clear();
    for (std::uint64_t i = 0; i < n; ++i) trainer->snapshots_.snapshots.push_back(get_frozen_policy(r));
  }
  {
    ByteReader r(need("INIT"));
    const std::uint64_t n = r.u64();
    trainer->initial_obs_.clear();
    for (std::uint64_t i = 0; i < n; ++i) trainer->initial_obs_.push_back(r.vec());
  }
  {
    ByteReader r(need("CTRS"));
    trainer->epochs_completed_ = static_cast<int>(r.i64());
    trainer->global_cycle_ = r.i64();
    trainer->next_snapshot_id_ = static_cast<int>(r.i64());
    trainer->real_steps_total_ = r.i64();
    trainer->imag_steps_total_ = r.i64();
    trainer->last_model_loss_ = r.f64();
    trainer->early_stopped_ = r.i64() != 0;
    trainer->elapsed_seconds_ = r.f64();
    trainer->counters_.model_train_calls = r.i64();
    trainer->counters_.regen_invocations = r.i64();
    trainer->counters_.imag_episodes_generated = r.i64();
    trainer->counters_.curiosity_batches = r.i64();
  }
  {
    ByteReader r(need("RNGS"));
    trainer->rng_collect_ = rng_from_string(r.str());
    trainer->rng_model_ = rng_from_string(r.str());
    trainer->rng_rollout_ = rng_from_string(r.str());
    trainer->rng_sample_ = rng_from_string(r.str());
  }
  {
    ByteReader r(need("METR"));
    const std::uint64_t n = r.u64();
    trainer->metrics_.clear();
    for (std::uint64_t i = 0; i < n; ++i) {
      MetricsRow row;
      row.epoch = static_cast<int>(r.i64());
      row.real_steps_total = r.i64();
      row.imag_steps_total = r.i64();
      row.eval_success_rate = r.f64();
      row.mean_intrinsic_reward = r.f64();
      row.model_loss = r.f64();
      row.p_imag = r.f64();
      row.wall_clock_seconds = r.f64();
      trainer->metrics_.push_back(row);
    }
  }
  return trainer;
}

std::unique_ptr<Trainer> Trainer::load_checkpoint(const std::string& path, const std::string& expected_task) {
  auto sections = read_checkpoint_file(path);
  const auto it = sections.find("CONF");
  if (it == sections.end()) throw std::runtime_error("checkpoint missing section 'CONF': " + path);
  ByteReader conf(it->second);
  const TrainConfig cfg = finalize_config(parse_config_text(conf.str()));
  if (cfg.task != expected_task)
    throw std::runtime_error("checkpoint task mismatch: checkpoint was trained on '" + cfg.task +
                             "', expected '" + expected_task + "'");
  return load_checkpoint(path);
}

}  // namespace iher
