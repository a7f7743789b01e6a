#include "sdd/features.hpp"

#include <algorithm>

#include <json.hpp>

namespace sdd {

static double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

VecXd featurize(const Env& env) {
  const Geography& geo = env.geography();
  const int J = geo.region_count();
  const int M = env.vehicle_count();
  const double t_max = geo.day_length_minutes;
  const Request& req = env.request();
  const std::vector<InsertionResult>& slots = env.feasible();

  VecXd x = VecXd::Zero(feature_dim(J, M));
  int at = 0;
  x[at++] = clamp01(env.time() / t_max);
  for (int j = 1; j <= J; ++j) x[at++] = req.region_id == j ? 1.0 : 0.0;
  x[at++] = clamp01(travel_time(geo.depot, req.location, geo) / t_max);
  for (int m = 0; m < M; ++m) {
    // When the vehicle is next idle at the depot: the end of its planned
    // tour, or the return of the ongoing one when nothing is planned.
    const PlannedRoute& plan = env.fleet().vehicles[m].planned;
    const double back = plan.empty()
                            ? plan.available_from
                            : plan.departure + route_duration(plan.stops, geo);
    x[at++] = clamp01(back / t_max);
  }
  for (int m = 0; m < M; ++m) x[at++] = slots[m].feasible ? 1.0 : 0.0;
  for (int m = 0; m < M; ++m)
    x[at++] = slots[m].feasible ? clamp01(slots[m].delta / t_max) : 1.0;
  for (int j = 0; j < J; ++j)
    x[at++] = clamp01(service_rate(env.psi_accept()[j], env.psi_total()[j]));
  return x;
}

std::string feature_schema_json(int region_count, int vehicle_count) {
  nlohmann::json j;
  j["schema"] = 1;
  j["dim"] = feature_dim(region_count, vehicle_count);
  nlohmann::json names = nlohmann::json::array();
  names.push_back("time");
  for (int r = 1; r <= region_count; ++r)
    names.push_back("region_" + std::to_string(r));
  names.push_back("depot_travel");
  for (int m = 1; m <= vehicle_count; ++m)
    names.push_back("return_" + std::to_string(m));
  for (int m = 1; m <= vehicle_count; ++m)
    names.push_back("feasible_" + std::to_string(m));
  for (int m = 1; m <= vehicle_count; ++m)
    names.push_back("delta_" + std::to_string(m));
  for (int r = 1; r <= region_count; ++r)
    names.push_back("service_rate_" + std::to_string(r));
  j["names"] = names;
  return j.dump(2) + "\n";
}

}  // namespace sdd
