#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdd/types.hpp"

namespace sdd {

// Axis-aligned service region. Arrival rate is the expected number of
// requests per day; it doubles as the fixed denominator n_j used by the
// modified fairness reward.
struct RegionSpec {
  int id = 0;  // 1-based
  Vec2 bounds_min = Vec2::Zero();
  Vec2 bounds_max = Vec2::Zero();
  Vec2 center = Vec2::Zero();
  double arrival_rate = 0.0;

  bool contains(const Vec2& p) const {
    return p.x() > bounds_min.x() && p.x() < bounds_max.x() &&
           p.y() > bounds_min.y() && p.y() < bounds_max.y();
  }
  double expected_count() const { return arrival_rate; }
};

struct Geography {
  std::vector<RegionSpec> regions;
  Vec2 depot = Vec2::Zero();
  double day_length_minutes = 480.0;
  double request_cutoff_minutes = 420.0;
  double deadline_minutes = 240.0;
  double speed_km_per_h = 30.0;
  double circuity_factor = 1.4;
  double load_time_minutes = 3.0;
  double dropoff_time_minutes = 3.0;
  double location_stddev_km = 3.0;

  int region_count() const { return static_cast<int>(regions.size()); }
  double expected_total() const {
    double n = 0.0;
    for (const auto& r : regions) n += r.arrival_rate;
    return n;
  }
  // Throws config_error when structurally invalid (overlapping regions,
  // non-positive speed, inconsistent horizon, ...).
  void validate() const;
};

struct Request {
  int index = 0;  // 1-based arrival order within the day
  double time_minutes = 0.0;
  Vec2 location = Vec2::Zero();
  int region_id = 0;  // 1-based
  double deadline_minutes = 0.0;
};

struct RequestInstance {
  std::vector<Request> requests;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(requests.size()); }
};

// Road-adjusted travel time in minutes: circuity * euclidean / speed.
double travel_time(const Vec2& a, const Vec2& b, const Geography& geo);

// One day of stochastic arrivals; a pure function of (geo, seed).
RequestInstance sample_instance(const Geography& geo, std::uint64_t seed);

enum class GeographyKind { dist, dens };

// The two study geographies. `d_km` is the region width; `lambda` overrides
// the per-region arrival rates (defaults 250/250 for dist, 100/400 for dens),
// `depot_override` relocates the depot for depot-placement studies.
Geography builtin_geography(GeographyKind kind, double d_km = 3.0,
                            std::optional<std::pair<double, double>> lambda = std::nullopt,
                            std::optional<Vec2> depot_override = std::nullopt);

// JSON schema "geography.json" (see README). Round-trips exactly.
std::string geography_to_json(const Geography& geo);
Geography geography_from_json(const std::string& text);
Geography load_geography(const std::string& path);
void save_geography(const Geography& geo, const std::string& path);

// Instance CSV: index,time_min,x_km,y_km,region,deadline_min (times with
// three decimals).
void write_instance_csv(const RequestInstance& inst, std::ostream& out);
RequestInstance read_instance_csv(std::istream& in);

}  // namespace sdd
