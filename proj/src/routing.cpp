#include "sdd/routing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace sdd {

double route_duration(const std::vector<Stop>& stops, const Geography& geo) {
  if (stops.empty()) return 0.0;
  double dur = geo.load_time_minutes;
  Vec2 prev = geo.depot;
  for (const Stop& stop : stops) {
    dur += travel_time(prev, stop.location, geo);
    dur += geo.dropoff_time_minutes;
    prev = stop.location;
  }
  dur += travel_time(prev, geo.depot, geo);
  return dur;
}

std::vector<double> arrival_times(const std::vector<Stop>& stops, double s,
                                  const Geography& geo) {
  std::vector<double> arr;
  arr.reserve(stops.size());
  double t = s + geo.load_time_minutes;
  Vec2 prev = geo.depot;
  for (const Stop& stop : stops) {
    t += travel_time(prev, stop.location, geo);
    arr.push_back(t);
    t += geo.dropoff_time_minutes;
    prev = stop.location;
  }
  return arr;
}

double latest_departure(const std::vector<Stop>& stops, const Geography& geo) {
  if (stops.empty()) return -std::numeric_limits<double>::infinity();
  // arrival_i = s + load + prefix_i, so the deadline at stop i caps the
  // departure at deadline_i - load - prefix_i; the end of day caps it at
  // t_max - duration.
  double s = geo.day_length_minutes - route_duration(stops, geo);
  double prefix = 0.0;
  Vec2 prev = geo.depot;
  for (size_t i = 0; i < stops.size(); ++i) {
    prefix += travel_time(prev, stops[i].location, geo);
    s = std::min(s, stops[i].deadline_minutes - geo.load_time_minutes - prefix);
    prefix += geo.dropoff_time_minutes;
    prev = stops[i].location;
  }
  return s;
}

InsertionResult cheapest_insertion(const PlannedRoute& route, const Request& req,
                                   const Geography& geo, double now) {
  const double earliest = std::max(route.available_from, now);
  const double base = route_duration(route.stops, geo);
  InsertionResult best;
  std::vector<Stop> candidate;
  candidate.reserve(route.stops.size() + 1);
  for (int pos = 0; pos <= route.size(); ++pos) {
    candidate.assign(route.stops.begin(), route.stops.end());
    candidate.insert(candidate.begin() + pos,
                     Stop{req.index, req.location, req.deadline_minutes});
    const double s = latest_departure(candidate, geo);
    if (s < earliest - kTimeTol) continue;
    const double delta = route_duration(candidate, geo) - base;
    if (!best.feasible || delta < best.delta) {
      best.feasible = true;
      best.position = pos;
      best.delta = delta;
      best.departure = s;
    }
  }
  return best;
}

std::vector<InsertionResult> feasibility_vector(const FleetState& fleet,
                                                const Request& req,
                                                const Geography& geo,
                                                double now) {
  std::vector<InsertionResult> out;
  out.reserve(fleet.vehicles.size());
  for (const Vehicle& v : fleet.vehicles)
    out.push_back(cheapest_insertion(v.planned, req, geo, now));
  return out;
}

InsertionResult assign(FleetState& fleet, int m, const Request& req,
                       const Geography& geo, double now) {
  if (m < 0 || m >= fleet.size())
    throw contract_error("assign: vehicle index out of range");
  PlannedRoute& route = fleet.vehicles[m].planned;
  const InsertionResult ins = cheapest_insertion(route, req, geo, now);
  if (!ins.feasible)
    throw contract_error("assign: request " + std::to_string(req.index) +
                         " does not fit vehicle " + std::to_string(m + 1));
  route.stops.insert(route.stops.begin() + ins.position,
                     Stop{req.index, req.location, req.deadline_minutes});
  route.departure = ins.departure;
  return ins;
}

void advance(FleetState& fleet, double from, double to, const Geography& geo) {
  if (to < from - kTimeTol)
    throw contract_error("advance: time must not run backwards");
  for (Vehicle& v : fleet.vehicles) {
    PlannedRoute& route = v.planned;
    if (route.empty() || route.departure > to + kTimeTol) continue;
    OngoingRoute gone;
    gone.available_from = route.available_from;
    gone.departure = route.departure;
    gone.return_time = route.departure + route_duration(route.stops, geo);
    gone.stops = std::move(route.stops);
    route = PlannedRoute{};
    route.available_from = gone.return_time;
    v.done.push_back(std::move(gone));
  }
}

void verify(const FleetState& fleet, const Geography& geo, double now) {
  if (fleet.vehicles.empty()) throw contract_error("verify: empty fleet");
  for (int m = 0; m < fleet.size(); ++m) {
    const std::string tag = "verify: vehicle " + std::to_string(m + 1);
    const PlannedRoute& route = fleet.vehicles[m].planned;
    if (route.empty()) {
      if (route.departure != kNoDeparture)
        throw contract_error(tag + ": empty route with a departure");
    } else {
      if (route.departure < now - kTimeTol)
        throw contract_error(tag + ": planned departure in the past");
      if (route.departure < route.available_from - kTimeTol)
        throw contract_error(tag + ": departs before the vehicle is back");
      const double latest = latest_departure(route.stops, geo);
      if (std::abs(route.departure - latest) > kTimeTol)
        throw contract_error(tag + ": departure is not latest-feasible");
      const std::vector<double> arr = arrival_times(route.stops, route.departure, geo);
      for (size_t i = 0; i < route.stops.size(); ++i)
        if (arr[i] > route.stops[i].deadline_minutes + kTimeTol)
          throw contract_error(tag + ": deadline missed in plan");
      const double ret = route.departure + route_duration(route.stops, geo);
      if (ret > geo.day_length_minutes + kTimeTol)
        throw contract_error(tag + ": plan returns after end of day");
    }
    double prev_return = 0.0;
    for (const OngoingRoute& gone : fleet.vehicles[m].done) {
      if (gone.stops.empty())
        throw contract_error(tag + ": dispatched an empty tour");
      if (gone.departure < gone.available_from - kTimeTol ||
          gone.departure < prev_return - kTimeTol)
        throw contract_error(tag + ": tours overlap");
      prev_return = gone.return_time;
    }
    if (!route.empty() && route.departure < prev_return - kTimeTol)
      throw contract_error(tag + ": plan departs before the last tour returns");
  }
}

void write_route_trace(const FleetState& fleet, const Geography& geo,
                       std::ostream& out) {
  out << "vehicle,event,time_min,customer\n";
  char line[96];
  for (int m = 0; m < fleet.size(); ++m) {
    for (const OngoingRoute& tour : fleet.vehicles[m].done) {
      std::snprintf(line, sizeof(line), "%d,depart,%.3f,0\n", m + 1,
                    tour.departure);
      out << line;
      const std::vector<double> arr = arrival_times(tour.stops, tour.departure, geo);
      for (size_t i = 0; i < tour.stops.size(); ++i) {
        std::snprintf(line, sizeof(line), "%d,arrive,%.3f,%d\n", m + 1, arr[i],
                      tour.stops[i].request_index);
        out << line;
      }
      std::snprintf(line, sizeof(line), "%d,return,%.3f,0\n", m + 1,
                    tour.return_time);
      out << line;
    }
  }
}

}  // namespace sdd
