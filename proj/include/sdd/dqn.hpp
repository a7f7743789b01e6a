#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdd/eval.hpp"
#include "sdd/features.hpp"
#include "sdd/net.hpp"
#include "sdd/policy.hpp"

namespace sdd {

// Training runs in float; gradient checking in tests instantiates the
// double variant directly.
using QNet = Mlp<float>;

struct Experience {
  VecX<float> x;
  int action = 0;
  float reward = 0.0f;
  VecX<float> x_next;               // empty when terminal
  std::uint32_t next_feasible = 0;  // bit a set = action a allowed next
  bool terminal = false;
};

// Fixed-capacity ring with uniform without-replacement batch sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);
  void push(Experience e);
  int size() const { return static_cast<int>(ring_.size()); }
  int capacity() const { return capacity_; }
  const Experience& at(int i) const { return ring_[i]; }
  // k distinct indices into [0, size), uniform (Floyd's sampling).
  void sample(int k, rng::Engine& eng, std::vector<int>& out) const;

 private:
  int capacity_ = 0;
  int head_ = 0;  // next slot to overwrite once full
  std::vector<Experience> ring_;
};

struct TrainConfig {
  int epochs = 200000;  // one sampled day per epoch
  std::vector<int> hidden = {50, 50};
  int batch_size = 32;
  int buffer_capacity = 50000;
  int target_sync = 1000;  // gradient steps between target-net refreshes
  double eps_start = 1.0;
  double eps_end = 0.01;
  double eps_decay_fraction = 0.9;  // point in training where eps bottoms out
  int checkpoint_period = 0;        // 0 = epochs / 100
  AdamParams adam;
  std::uint64_t seed = 1;

  void validate() const;
  int effective_checkpoint_period() const;
};

// Exponential decay from eps_start at epoch 0 down to eps_end at
// eps_decay_fraction * epochs, flat afterwards.
double epsilon_at(long epoch, const TrainConfig& cfg);

// Greedy over the Q-network restricted to feasible actions. Ties go to the
// lowest vehicle; rejecting needs a strictly larger value.
class NetPolicy : public Policy {
 public:
  explicit NetPolicy(QNet net, std::string name = "dqn");
  int act(const Env& env) override;
  std::string name() const override { return name_; }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<NetPolicy>(*this);
  }
  const QNet& net() const { return net_; }

 private:
  QNet net_;
  std::string name_;
};

struct TrainResult {
  QNet net;                            // state after the final epoch
  std::vector<int> checkpoint_epochs;  // 1-based
  std::vector<QNet> last_checkpoints;  // up to ten most recent, oldest first
};

// Deep Q-learning over days sampled from `pool` (with replacement). When
// run_dir is non-empty, drops ckpt_<epoch>.json plus a train_log.csv with
// greedy-policy rates on eval_pool at every checkpoint. Aborts when the
// loss stops being finite.
TrainResult train(const Geography& geo, int vehicle_count,
                  const RewardParams& reward, const TrainConfig& cfg,
                  const std::vector<RequestInstance>& pool,
                  const std::vector<RequestInstance>& eval_pool = {},
                  const std::string& run_dir = "");

}  // namespace sdd
