#include "sdd/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sdd {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw config_error("replay capacity must be positive");
  ring_.reserve(capacity);
}

void ReplayBuffer::push(Experience e) {
  if (size() < capacity_) {
    ring_.push_back(std::move(e));
  } else {
    ring_[head_] = std::move(e);
    head_ = (head_ + 1) % capacity_;
  }
}

void ReplayBuffer::sample(int k, rng::Engine& eng, std::vector<int>& out) const {
  if (k < 1 || k > size())
    throw contract_error("replay sample: batch exceeds buffer size");
  out.clear();
  for (int i = size() - k; i < size(); ++i) {
    const int j = static_cast<int>(rng::uniform_index(eng, i + 1));
    if (std::find(out.begin(), out.end(), j) != out.end())
      out.push_back(i);
    else
      out.push_back(j);
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw config_error("epochs must be positive");
  if (batch_size < 1) throw config_error("batch size must be positive");
  if (buffer_capacity < batch_size)
    throw config_error("replay capacity must hold at least one batch");
  if (target_sync < 1) throw config_error("target sync period must be positive");
  if (!(eps_end <= eps_start && eps_start <= 1.0) || eps_end <= 0.0)
    throw config_error("epsilon schedule needs 0 < eps_end <= eps_start <= 1");
  if (eps_decay_fraction <= 0.0 || eps_decay_fraction > 1.0)
    throw config_error("epsilon decay fraction must lie in (0, 1]");
  if (checkpoint_period < 0)
    throw config_error("checkpoint period must be non-negative");
  for (int h : hidden)
    if (h < 1) throw config_error("hidden sizes must be positive");
}

int TrainConfig::effective_checkpoint_period() const {
  if (checkpoint_period > 0) return checkpoint_period;
  return std::max(1, epochs / 100);
}

double epsilon_at(long epoch, const TrainConfig& cfg) {
  const double rate = std::log(cfg.eps_start / cfg.eps_end) /
                      (cfg.eps_decay_fraction * cfg.epochs);
  return std::max(cfg.eps_end, cfg.eps_start * std::exp(-rate * epoch));
}

NetPolicy::NetPolicy(QNet net, std::string name)
    : net_(std::move(net)), name_(std::move(name)) {}

namespace {

// Assigns first (lowest index), reject only on a strictly larger value.
int greedy_action(const VecX<float>& q,
                  const std::vector<InsertionResult>& slots) {
  int best = -1;
  for (int m = 0; m < static_cast<int>(slots.size()); ++m) {
    if (!slots[m].feasible) continue;
    if (best < 0 || q[m + 1] > q[best]) best = m + 1;
  }
  if (best < 0 || q[0] > q[best]) return 0;
  return best;
}

}  // namespace

int NetPolicy::act(const Env& env) {
  const VecX<float> x = featurize(env).cast<float>();
  if (x.size() != net_.input_dim())
    throw contract_error("net policy: feature size does not match network");
  return greedy_action(net_.forward(x), env.feasible());
}

TrainResult train(const Geography& geo, int vehicle_count,
                  const RewardParams& reward, const TrainConfig& cfg,
                  const std::vector<RequestInstance>& pool,
                  const std::vector<RequestInstance>& eval_pool,
                  const std::string& run_dir) {
  cfg.validate();
  if (pool.empty()) throw config_error("training needs a non-empty pool");
  if (vehicle_count + 1 > 32)
    throw config_error("feasibility mask supports at most 31 vehicles");

  Env env(geo, vehicle_count, reward);
  const int J = geo.region_count();
  const int D = feature_dim(J, vehicle_count);
  const int A = vehicle_count + 1;
  std::vector<int> sizes;
  sizes.push_back(D);
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(A);

  QNet net(sizes, cfg.seed);
  QNet target = net;
  ReplayBuffer buffer(cfg.buffer_capacity);
  // Decouple the stream driving exploration from weight initialization.
  rng::Engine eng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  std::ofstream log;
  if (!run_dir.empty()) {
    log.open(run_dir + "/train_log.csv");
    if (!log) throw config_error("cannot write train log in " + run_dir);
    log << "epoch,epsilon,loss,eval_r_total,eval_r_min\n";
  }

  const int B = cfg.batch_size;
  const int period = cfg.effective_checkpoint_period();
  MatX<float> X(B, D), Xn(B, D);
  VecX<float> targets(B);
  std::vector<int> actions(B);
  std::vector<int> picks;
  std::vector<int> allowed;
  long grad_steps = 0;
  TrainResult result;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double eps = epsilon_at(epoch, cfg);
    const RequestInstance& inst =
        pool[rng::uniform_index(eng, pool.size())];
    env.reset(inst);
    double loss_sum = 0.0;
    long loss_count = 0;
    VecX<float> x;
    if (!env.done()) x = featurize(env).cast<float>();
    while (!env.done()) {
      const std::vector<InsertionResult>& slots = env.feasible();
      int action;
      if (rng::uniform01(eng) <= eps) {
        allowed.clear();
        allowed.push_back(0);
        for (int m = 0; m < vehicle_count; ++m)
          if (slots[m].feasible) allowed.push_back(m + 1);
        action = allowed[rng::uniform_index(eng, allowed.size())];
      } else {
        action = greedy_action(net.forward(x), slots);
      }
      const StepResult sr = env.step(action);

      Experience exp;
      exp.x = x;
      exp.action = action;
      exp.reward = static_cast<float>(sr.reward);
      exp.terminal = sr.done;
      if (!sr.done) {
        exp.x_next = featurize(env).cast<float>();
        exp.next_feasible = 1u;  // rejecting stays possible
        for (int m = 0; m < vehicle_count; ++m)
          if (env.feasible()[m].feasible) exp.next_feasible |= 1u << (m + 1);
        x = exp.x_next;
      }
      buffer.push(std::move(exp));

      if (buffer.size() >= B) {
        buffer.sample(B, eng, picks);
        for (int i = 0; i < B; ++i) {
          const Experience& e = buffer.at(picks[i]);
          X.row(i) = e.x.transpose();
          actions[i] = e.action;
          if (e.terminal)
            Xn.row(i).setZero();
          else
            Xn.row(i) = e.x_next.transpose();
        }
        const MatX<float> Qn = target.forward_batch(Xn);
        for (int i = 0; i < B; ++i) {
          const Experience& e = buffer.at(picks[i]);
          float best = 0.0f;
          if (!e.terminal) {
            bool first = true;
            for (int a = 0; a < A; ++a) {
              if (!(e.next_feasible & (1u << a))) continue;
              if (first || Qn(i, a) > best) best = Qn(i, a);
              first = false;
            }
          }
          targets[i] = e.reward + best;
        }
        const float loss = net.train_batch(X, actions, targets, cfg.adam);
        if (!std::isfinite(loss)) {
          char msg[128];
          std::snprintf(msg, sizeof(msg),
                        "training diverged: loss not finite at epoch %d, "
                        "gradient step %ld",
                        epoch + 1, grad_steps + 1);
          throw contract_error(msg);
        }
        loss_sum += loss;
        ++loss_count;
        if (++grad_steps % cfg.target_sync == 0) target = net;
      }
    }

    const bool at_checkpoint =
        (epoch + 1) % period == 0 || epoch + 1 == cfg.epochs;
    if (log.is_open()) {
      std::string eval_cols = ",,";
      if (at_checkpoint && !eval_pool.empty()) {
        NetPolicy greedy(net);
        const EvalReport rep =
            evaluate_pool(greedy, geo, vehicle_count, reward, eval_pool);
        char cols[64];
        std::snprintf(cols, sizeof(cols), ",%.6f,%.6f", rep.r_total, rep.r_min);
        eval_cols = cols;
      }
      char row[160];
      if (loss_count > 0)
        std::snprintf(row, sizeof(row), "%d,%.6f,%.6g%s\n", epoch + 1, eps,
                      loss_sum / loss_count, eval_cols.c_str());
      else
        std::snprintf(row, sizeof(row), "%d,%.6f,%s\n", epoch + 1, eps,
                      eval_cols.c_str());
      log << row;
      log.flush();
    }
    if (at_checkpoint) {
      result.checkpoint_epochs.push_back(epoch + 1);
      if (!run_dir.empty())
        net.save(run_dir + "/ckpt_" + std::to_string(epoch + 1) + ".json");
      result.last_checkpoints.push_back(net);
      if (result.last_checkpoints.size() > 10)
        result.last_checkpoints.erase(result.last_checkpoints.begin());
    }
  }
  result.net = std::move(net);
  return result;
}

}  // namespace sdd
