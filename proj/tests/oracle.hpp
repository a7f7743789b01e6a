#pragma once

// Brute-force reference for the insertion logic under test. Everything here
// is recomputed from the geometry with plain loops: no calls into the routing
// translation unit, so a bug there cannot hide in here. Arithmetic follows the
// same front-to-back summation order as the library so comparisons can demand
// exact equality instead of a tolerance.

#include <limits>
#include <vector>

#include "sdd/routing.hpp"
#include "sdd/types.hpp"
#include "sdd/world.hpp"

namespace oracle {

inline double leg_minutes(const sdd::Vec2& a, const sdd::Vec2& b,
                          const sdd::Geography& geo) {
  const double km = geo.circuity_factor * (a - b).norm();
  return km / geo.speed_km_per_h * 60.0;
}

inline double tour_minutes(const std::vector<sdd::Stop>& stops,
                           const sdd::Geography& geo) {
  if (stops.empty()) return 0.0;
  double total = geo.load_time_minutes;
  sdd::Vec2 at = geo.depot;
  for (const sdd::Stop& stop : stops) {
    total += leg_minutes(at, stop.location, geo);
    total += geo.dropoff_time_minutes;
    at = stop.location;
  }
  total += leg_minutes(at, geo.depot, geo);
  return total;
}

// Scan departure candidates directly: the arrival at every stop moves
// one-to-one with the departure, so the binding constraint is the smallest
// slack over stops and the end of day.
inline double latest_start(const std::vector<sdd::Stop>& stops,
                           const sdd::Geography& geo) {
  if (stops.empty()) return -std::numeric_limits<double>::infinity();
  double best = geo.day_length_minutes - tour_minutes(stops, geo);
  double prefix = 0.0;
  sdd::Vec2 at = geo.depot;
  for (const sdd::Stop& stop : stops) {
    prefix += leg_minutes(at, stop.location, geo);
    const double cap = stop.deadline_minutes - geo.load_time_minutes - prefix;
    if (cap < best) best = cap;
    prefix += geo.dropoff_time_minutes;
    at = stop.location;
  }
  return best;
}

struct Slot {
  bool feasible = false;
  int position = -1;
  double delta = std::numeric_limits<double>::infinity();
  double departure = sdd::kNoDeparture;
};

// Try every insertion index in order; keep the first strict minimum so ties
// resolve to the lowest position.
inline Slot scan_route(const sdd::PlannedRoute& route, const sdd::Request& req,
                       const sdd::Geography& geo, double now) {
  const double earliest = std::max(route.available_from, now);
  const double base = tour_minutes(route.stops, geo);
  Slot best;
  for (int pos = 0; pos <= static_cast<int>(route.stops.size()); ++pos) {
    std::vector<sdd::Stop> trial = route.stops;
    trial.insert(trial.begin() + pos,
                 sdd::Stop{req.index, req.location, req.deadline_minutes});
    const double start = latest_start(trial, geo);
    if (start < earliest - sdd::kTimeTol) continue;
    const double delta = tour_minutes(trial, geo) - base;
    if (!best.feasible || delta < best.delta) {
      best.feasible = true;
      best.position = pos;
      best.delta = delta;
      best.departure = start;
    }
  }
  return best;
}

// Fleet-wide enumeration of every (vehicle, position) pair. Vehicle ties
// resolve to the lowest index, matching the dispatch rule.
struct FleetSlot {
  bool feasible = false;
  int vehicle = -1;
  Slot slot;
};

inline FleetSlot scan_fleet(const sdd::FleetState& fleet,
                            const sdd::Request& req, const sdd::Geography& geo,
                            double now) {
  FleetSlot best;
  for (int m = 0; m < fleet.size(); ++m) {
    const Slot s = scan_route(fleet.vehicles[m].planned, req, geo, now);
    if (!s.feasible) continue;
    if (!best.feasible || s.delta < best.slot.delta) {
      best.feasible = true;
      best.vehicle = m;
      best.slot = s;
    }
  }
  return best;
}

}  // namespace oracle
