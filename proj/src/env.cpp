#include "sdd/env.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace sdd {

RewardMode reward_mode_from_string(const std::string& s) {
  if (s == "rate_based") return RewardMode::rate_based;
  if (s == "modified") return RewardMode::modified;
  if (s == "priority") return RewardMode::priority;
  throw config_error("unknown reward mode: " + s);
}

std::string to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::rate_based: return "rate_based";
    case RewardMode::modified: return "modified";
    case RewardMode::priority: return "priority";
  }
  throw contract_error("bad reward mode");
}

void RewardParams::validate(int region_count) const {
  if (alpha < 0.0 || alpha > 1.0)
    throw config_error("alpha must lie in [0, 1]");
  if (mode == RewardMode::priority) {
    if (priorities.size() != region_count)
      throw config_error("priority mode needs one priority per region");
    for (int j = 0; j < priorities.size(); ++j)
      if (priorities[j] < 0.0)
        throw config_error("priorities must be non-negative");
  }
}

double reward_rate_total(int k, bool accept, long accepted_before) {
  if (k < 1) throw contract_error("reward_rate_total: k is 1-based");
  const double a = accept ? 1.0 : 0.0;
  const double before =
      k > 1 ? static_cast<double>(accepted_before) / (k - 1) : 0.0;
  return (a + accepted_before) / k - before;
}

double reward_rate_min(bool accept, int region, const std::vector<long>& acc,
                       const std::vector<long>& tot) {
  if (acc.size() != tot.size() || acc.empty())
    throw contract_error("reward_rate_min: counter size mismatch");
  if (region < 1 || region > static_cast<int>(acc.size()))
    throw contract_error("reward_rate_min: region out of range");
  double before = std::numeric_limits<double>::infinity();
  double after = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < acc.size(); ++j) {
    const bool hit = static_cast<int>(j) + 1 == region;
    before = std::min(before, service_rate(acc[j], tot[j]));
    after = std::min(after, service_rate(acc[j] + (hit && accept ? 1 : 0),
                                         tot[j] + (hit ? 1 : 0)));
  }
  return after - before;
}

int argmin_service_rate(const std::vector<long>& acc, const VecXd& expected) {
  if (static_cast<int>(acc.size()) != expected.size())
    throw contract_error("argmin_service_rate: size mismatch");
  int z = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < expected.size(); ++j) {
    if (expected[j] <= 0.0) continue;
    const double rate = static_cast<double>(acc[j]) / expected[j];
    if (rate < best) {
      best = rate;
      z = j + 1;
    }
  }
  if (z == 0)
    throw contract_error("argmin_service_rate: no region expects requests");
  return z;
}

double reward_modified(bool accept, int region, int z_min,
                       const VecXd& expected, double alpha) {
  if (!accept) return 0.0;
  if (region != z_min) return 1.0 - alpha;
  return 1.0 - alpha + alpha * expected.sum() / expected[z_min - 1];
}

double reward_priority(bool accept, int region, const VecXd& priorities) {
  if (!accept) return 0.0;
  if (region < 1 || region > priorities.size())
    throw contract_error("reward_priority: region out of range");
  return priorities[region - 1];
}

Env::Env(Geography geo, int vehicle_count, RewardParams reward)
    : geo_(std::move(geo)), vehicle_count_(vehicle_count),
      reward_(std::move(reward)) {
  geo_.validate();
  if (vehicle_count_ < 1) throw config_error("need at least one vehicle");
  reward_.validate(geo_.region_count());
  expected_ = VecXd(geo_.region_count());
  for (int j = 0; j < geo_.region_count(); ++j)
    expected_[j] = geo_.regions[j].expected_count();
  fleet_ = FleetState(vehicle_count_);
  psi_accept_.assign(geo_.region_count(), 0);
  psi_total_.assign(geo_.region_count(), 0);
}

void Env::reset(const RequestInstance& inst) {
  requests_ = inst.requests;
  for (const Request& r : requests_) {
    if (r.region_id < 1 || r.region_id > geo_.region_count())
      throw config_error("request region out of range");
    if (r.time_minutes < 0.0 || r.time_minutes > geo_.day_length_minutes)
      throw config_error("request time outside the operating day");
  }
  fleet_ = FleetState(vehicle_count_);
  psi_accept_.assign(geo_.region_count(), 0);
  psi_total_.assign(geo_.region_count(), 0);
  cursor_ = 0;
  records_.clear();
  if (!done())
    feasible_ = feasibility_vector(fleet_, requests_[0], geo_, time());
}

double Env::time() const {
  if (done()) throw contract_error("env: day is over");
  return requests_[cursor_].time_minutes;
}

const Request& Env::request() const {
  if (done()) throw contract_error("env: day is over");
  return requests_[cursor_];
}

const std::vector<InsertionResult>& Env::feasible() const {
  if (done()) throw contract_error("env: day is over");
  return feasible_;
}

bool Env::any_feasible() const {
  for (const InsertionResult& ins : feasible())
    if (ins.feasible) return true;
  return false;
}

long Env::accepted_count() const {
  long n = 0;
  for (long a : psi_accept_) n += a;
  return n;
}

double Env::reward_for(int action) const {
  const bool accept = action != 0;
  const int region = requests_[cursor_].region_id;
  switch (reward_.mode) {
    case RewardMode::rate_based: {
      const double r_total = reward_rate_total(k(), accept, accepted_count());
      const double r_min =
          reward_rate_min(accept, region, psi_accept_, psi_total_);
      return (1.0 - reward_.alpha) * r_total + reward_.alpha * r_min;
    }
    case RewardMode::modified: {
      const int z = argmin_service_rate(psi_accept_, expected_);
      return reward_modified(accept, region, z, expected_, reward_.alpha);
    }
    case RewardMode::priority:
      return reward_priority(accept, region, reward_.priorities);
  }
  throw contract_error("bad reward mode");
}

StepResult Env::step(int action) {
  if (done()) throw contract_error("env: step after the day is over");
  if (action < 0 || action > vehicle_count_)
    throw contract_error("env: action out of range");
  const Request& req = requests_[cursor_];
  const double now = req.time_minutes;
  const double reward = reward_for(action);
  if (action != 0) assign(fleet_, action - 1, req, geo_, now);
  psi_total_[req.region_id - 1] += 1;
  if (action != 0) psi_accept_[req.region_id - 1] += 1;
  if (recording_) {
    DecisionRecord rec;
    rec.k = k();
    rec.time_minutes = now;
    rec.region = req.region_id;
    rec.action = action;
    rec.reward = reward;
    rec.psi_accept = psi_accept_;
    rec.psi_total = psi_total_;
    records_.push_back(std::move(rec));
  }
  const int next = cursor_ + 1;
  const double t_next = next < static_cast<int>(requests_.size())
                            ? requests_[next].time_minutes
                            : geo_.day_length_minutes;
  advance(fleet_, now, t_next, geo_);
  verify(fleet_, geo_, t_next);
  cursor_ = next;
  if (!done())
    feasible_ = feasibility_vector(fleet_, requests_[cursor_], geo_, t_next);
  else
    feasible_.clear();
  return {reward, done()};
}

void write_decision_log(const std::vector<DecisionRecord>& records,
                        int region_count, std::ostream& out) {
  out << "k,time_min,region,action,vehicle,reward";
  for (int j = 1; j <= region_count; ++j) out << ",psi_accept_" << j;
  for (int j = 1; j <= region_count; ++j) out << ",psi_total_" << j;
  out << "\n";
  char buf[96];
  for (const DecisionRecord& rec : records) {
    std::snprintf(buf, sizeof(buf), "%d,%.3f,%d,%s,%d,%.9g", rec.k,
                  rec.time_minutes, rec.region,
                  rec.action == 0 ? "reject" : "accept", rec.action,
                  rec.reward);
    out << buf;
    for (long a : rec.psi_accept) out << ',' << a;
    for (long t : rec.psi_total) out << ',' << t;
    out << "\n";
  }
}

}  // namespace sdd
