#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "sdd/types.hpp"
#include "sdd/world.hpp"

namespace sdd {

// Departure sentinel for a planned route with no stops yet.
inline constexpr double kNoDeparture = std::numeric_limits<double>::infinity();

struct Stop {
  int request_index = 0;
  Vec2 location = Vec2::Zero();
  double deadline_minutes = 0.0;
};

// A tentative depot-to-depot tour. The vehicle waits at the depot until
// `departure`, which is always kept at the latest feasible instant so late
// requests can still be slotted in. `available_from` is when the vehicle is
// back at the depot from its previous (ongoing) tour.
struct PlannedRoute {
  double available_from = 0.0;
  double departure = kNoDeparture;
  std::vector<Stop> stops;

  bool empty() const { return stops.empty(); }
  int size() const { return static_cast<int>(stops.size()); }
};

// A dispatched tour. Immutable once the vehicle has left the depot.
struct OngoingRoute {
  double available_from = 0.0;
  double departure = 0.0;
  double return_time = 0.0;
  std::vector<Stop> stops;
};

struct Vehicle {
  PlannedRoute planned;
  std::vector<OngoingRoute> done;
};

struct FleetState {
  std::vector<Vehicle> vehicles;

  int size() const { return static_cast<int>(vehicles.size()); }
  explicit FleetState(int m = 0) : vehicles(m) {}
};

// Load time + travel legs + one drop-off per stop; zero for an empty route.
// Summed front to back so equal routes produce bit-identical durations.
double route_duration(const std::vector<Stop>& stops, const Geography& geo);

// Arrival instant at each stop for a departure at `s`.
std::vector<double> arrival_times(const std::vector<Stop>& stops, double s,
                                  const Geography& geo);

// Latest departure that still meets every stop deadline and returns by the
// end of day; -inf when the stop set is empty or impossible.
double latest_departure(const std::vector<Stop>& stops, const Geography& geo);

struct InsertionResult {
  bool feasible = false;
  int position = -1;      // insertion index into PlannedRoute::stops
  double delta = std::numeric_limits<double>::infinity();  // duration increase
  double departure = kNoDeparture;  // latest feasible departure after insertion
};

// Cheapest feasible slot for `req` in `route`, departing no earlier than
// max(route.available_from, now). Position ties resolve to the front.
InsertionResult cheapest_insertion(const PlannedRoute& route, const Request& req,
                                   const Geography& geo, double now);

// Cheapest insertion per vehicle, in fleet order.
std::vector<InsertionResult> feasibility_vector(const FleetState& fleet,
                                                const Request& req,
                                                const Geography& geo, double now);

// Commit `req` to vehicle `m` (0-based) at its cheapest slot and push the
// departure back out to the latest feasible instant. Throws contract_error
// when no slot fits.
InsertionResult assign(FleetState& fleet, int m, const Request& req,
                       const Geography& geo, double now);

// Dispatch every planned route whose departure falls at or before `to`:
// the route becomes ongoing and the vehicle gets a fresh empty plan that
// starts when the tour returns.
void advance(FleetState& fleet, double from, double to, const Geography& geo);

// Contract check after mutations: departures are latest-feasible, not in the
// past, deadlines and end of day hold. Throws contract_error on violation.
void verify(const FleetState& fleet, const Geography& geo, double now);

// vehicle,event,time_min,customer rows for every dispatched tour
// (event in {depart, arrive, return}; customer 0 for depot events).
void write_route_trace(const FleetState& fleet, const Geography& geo,
                       std::ostream& out);

}  // namespace sdd
