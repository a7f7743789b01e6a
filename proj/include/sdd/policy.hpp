#pragma once

#include <memory>
#include <string>

#include "sdd/env.hpp"

namespace sdd {

// A dispatching rule: one action per decision point. Policies may keep
// per-day state; begin_day() is called by every episode runner before the
// first decision. clone() lets evaluation fan days out across threads.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_day() {}
  virtual int act(const Env& env) = 0;  // 0 reject, 1..M assign
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
};

}  // namespace sdd
