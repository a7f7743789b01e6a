#include "sdd/world.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sdd/rng.hpp"

namespace sdd {

using nlohmann::json;

void Geography::validate() const {
  if (regions.empty()) throw config_error("geography needs at least one region");
  for (int j = 0; j < region_count(); ++j) {
    const RegionSpec& r = regions[j];
    if (r.id != j + 1) throw config_error("region ids must be 1..J in order");
    if (!(r.bounds_min.x() < r.bounds_max.x()) ||
        !(r.bounds_min.y() < r.bounds_max.y()))
      throw config_error("region " + std::to_string(r.id) + " has empty bounds");
    if (!r.contains(r.center))
      throw config_error("region " + std::to_string(r.id) +
                         " center lies outside its bounds");
    if (r.arrival_rate < 0.0)
      throw config_error("region " + std::to_string(r.id) +
                         " has negative arrival rate");
  }
  for (size_t a = 0; a < regions.size(); ++a)
    for (size_t b = a + 1; b < regions.size(); ++b) {
      const RegionSpec& p = regions[a];
      const RegionSpec& q = regions[b];
      const bool overlap = p.bounds_min.x() < q.bounds_max.x() &&
                           q.bounds_min.x() < p.bounds_max.x() &&
                           p.bounds_min.y() < q.bounds_max.y() &&
                           q.bounds_min.y() < p.bounds_max.y();
      if (overlap)
        throw config_error("regions " + std::to_string(p.id) + " and " +
                           std::to_string(q.id) + " overlap");
    }
  if (speed_km_per_h <= 0.0) throw config_error("speed must be positive");
  if (circuity_factor < 1.0) throw config_error("circuity factor must be >= 1");
  if (day_length_minutes <= 0.0) throw config_error("day length must be positive");
  if (request_cutoff_minutes <= 0.0 ||
      request_cutoff_minutes > day_length_minutes)
    throw config_error("request cutoff must lie in (0, day length]");
  if (deadline_minutes <= 0.0) throw config_error("deadline must be positive");
  if (load_time_minutes < 0.0 || dropoff_time_minutes < 0.0)
    throw config_error("service times must be non-negative");
  if (location_stddev_km <= 0.0)
    throw config_error("location stddev must be positive");
}

double travel_time(const Vec2& a, const Vec2& b, const Geography& geo) {
  const double km = geo.circuity_factor * (a - b).norm();
  return km / geo.speed_km_per_h * 60.0;
}

RequestInstance sample_instance(const Geography& geo, std::uint64_t seed) {
  geo.validate();
  rng::Engine eng(seed);
  RequestInstance inst;
  inst.seed = seed;
  for (const RegionSpec& region : geo.regions) {
    const int n = rng::poisson(eng, region.arrival_rate);
    for (int i = 0; i < n; ++i) {
      Request req;
      req.time_minutes = rng::uniform(eng, 0.0, geo.request_cutoff_minutes);
      // Resample until the point falls strictly inside the region.
      do {
        req.location.x() = rng::normal(eng, region.center.x(), geo.location_stddev_km);
        req.location.y() = rng::normal(eng, region.center.y(), geo.location_stddev_km);
      } while (!region.contains(req.location));
      req.region_id = region.id;
      req.deadline_minutes = req.time_minutes + geo.deadline_minutes;
      inst.requests.push_back(req);
    }
  }
  // Stable sort keeps the (region, draw order) tie-break implied by the
  // generation order above.
  std::stable_sort(inst.requests.begin(), inst.requests.end(),
                   [](const Request& a, const Request& b) {
                     return a.time_minutes < b.time_minutes;
                   });
  for (int i = 0; i < inst.size(); ++i) inst.requests[i].index = i + 1;
  return inst;
}

Geography builtin_geography(GeographyKind kind, double d_km,
                            std::optional<std::pair<double, double>> lambda,
                            std::optional<Vec2> depot_override) {
  if (d_km <= 0.0) throw config_error("region width must be positive");
  const double d = d_km;
  Geography geo;
  RegionSpec r1, r2;
  r1.id = 1;
  r2.id = 2;
  if (kind == GeographyKind::dist) {
    // Two districts separated by a strip of width d that generates no
    // requests; the depot sits at the centre of the second district.
    r1.bounds_min = Vec2(0.0, 0.0);
    r1.bounds_max = Vec2(d, 2.0 * d);
    r2.bounds_min = Vec2(2.0 * d, 0.0);
    r2.bounds_max = Vec2(3.0 * d, 2.0 * d);
    r1.arrival_rate = 250.0;
    r2.arrival_rate = 250.0;
    geo.depot = Vec2(2.5 * d, d);
  } else {
    // Adjacent districts with a shared edge; the sparse one sees a fifth of
    // the demand of its dense neighbour. Depot on the shared edge.
    r1.bounds_min = Vec2(0.0, 0.0);
    r1.bounds_max = Vec2(d, 2.0 * d);
    r2.bounds_min = Vec2(d, 0.0);
    r2.bounds_max = Vec2(2.0 * d, 2.0 * d);
    r1.arrival_rate = 100.0;
    r2.arrival_rate = 400.0;
    geo.depot = Vec2(d, d);
  }
  r1.center = 0.5 * (r1.bounds_min + r1.bounds_max);
  r2.center = 0.5 * (r2.bounds_min + r2.bounds_max);
  if (lambda) {
    r1.arrival_rate = lambda->first;
    r2.arrival_rate = lambda->second;
  }
  if (depot_override) geo.depot = *depot_override;
  geo.regions = {r1, r2};
  geo.validate();
  return geo;
}

static json vec2_to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

static Vec2 vec2_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw config_error(std::string(what) + " must be a [x, y] number pair");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

std::string geography_to_json(const Geography& geo) {
  json j;
  j["schema"] = 1;
  j["depot"] = vec2_to_json(geo.depot);
  j["day_length_minutes"] = geo.day_length_minutes;
  j["request_cutoff_minutes"] = geo.request_cutoff_minutes;
  j["deadline_minutes"] = geo.deadline_minutes;
  j["speed_km_per_h"] = geo.speed_km_per_h;
  j["circuity_factor"] = geo.circuity_factor;
  j["load_time_minutes"] = geo.load_time_minutes;
  j["dropoff_time_minutes"] = geo.dropoff_time_minutes;
  j["location_stddev_km"] = geo.location_stddev_km;
  j["regions"] = json::array();
  for (const RegionSpec& r : geo.regions) {
    json rj;
    rj["id"] = r.id;
    rj["bounds_min"] = vec2_to_json(r.bounds_min);
    rj["bounds_max"] = vec2_to_json(r.bounds_max);
    rj["center"] = vec2_to_json(r.center);
    rj["arrival_rate"] = r.arrival_rate;
    j["regions"].push_back(rj);
  }
  return j.dump(2) + "\n";
}

Geography geography_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("geography json: ") + e.what());
  }
  try {
    if (j.value("schema", 0) != 1)
      throw config_error("geography json: unsupported schema");
    Geography geo;
    geo.depot = vec2_from_json(j.at("depot"), "depot");
    geo.day_length_minutes = j.at("day_length_minutes").get<double>();
    geo.request_cutoff_minutes = j.at("request_cutoff_minutes").get<double>();
    geo.deadline_minutes = j.at("deadline_minutes").get<double>();
    geo.speed_km_per_h = j.at("speed_km_per_h").get<double>();
    geo.circuity_factor = j.at("circuity_factor").get<double>();
    geo.load_time_minutes = j.at("load_time_minutes").get<double>();
    geo.dropoff_time_minutes = j.at("dropoff_time_minutes").get<double>();
    geo.location_stddev_km = j.at("location_stddev_km").get<double>();
    for (const json& rj : j.at("regions")) {
      RegionSpec r;
      r.id = rj.at("id").get<int>();
      r.bounds_min = vec2_from_json(rj.at("bounds_min"), "bounds_min");
      r.bounds_max = vec2_from_json(rj.at("bounds_max"), "bounds_max");
      r.center = vec2_from_json(rj.at("center"), "center");
      r.arrival_rate = rj.at("arrival_rate").get<double>();
      geo.regions.push_back(r);
    }
    geo.validate();
    return geo;
  } catch (const json::exception& e) {
    throw config_error(std::string("geography json: ") + e.what());
  }
}

Geography load_geography(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open geography file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return geography_from_json(buf.str());
}

void save_geography(const Geography& geo, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write geography file: " + path);
  out << geography_to_json(geo);
}

void write_instance_csv(const RequestInstance& inst, std::ostream& out) {
  out << "index,time_min,x_km,y_km,region,deadline_min\n";
  char line[160];
  for (const Request& r : inst.requests) {
    std::snprintf(line, sizeof(line), "%d,%.3f,%.6f,%.6f,%d,%.3f\n", r.index,
                  r.time_minutes, r.location.x(), r.location.y(), r.region_id,
                  r.deadline_minutes);
    out << line;
  }
}

RequestInstance read_instance_csv(std::istream& in) {
  RequestInstance inst;
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("index,time_min,x_km,y_km,region,deadline_min", 0) != 0)
    throw config_error("instance csv: bad header");
  int expect = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Request r;
    double x = 0.0, y = 0.0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%d,%lf", &r.index,
                    &r.time_minutes, &x, &y, &r.region_id,
                    &r.deadline_minutes) != 6)
      throw config_error("instance csv: bad row: " + line);
    if (r.index != expect++)
      throw config_error("instance csv: indices must be 1..N in order");
    r.location = Vec2(x, y);
    inst.requests.push_back(r);
  }
  return inst;
}

}  // namespace sdd
