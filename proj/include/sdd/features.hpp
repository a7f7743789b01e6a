#pragma once

#include <string>

#include "sdd/env.hpp"
#include "sdd/types.hpp"

namespace sdd {

// Q-network input layout, J regions and M vehicles, everything in [0, 1]:
//   [0]            decision time / day length
//   [1 .. J]       one-hot region of the current request
//   [1+J]          depot-to-request travel time / day length
//   [2+J    .. +M) vehicle return time (end of planned tour, else return
//                  of the ongoing one) / day length
//   [2+J+M  .. +M) 1 when the vehicle has a feasible slot
//   [2+J+2M .. +M) duration increase of the cheapest slot / day length
//                  (1 when infeasible)
//   [2+J+3M .. +J) regional service rates so far
inline int feature_dim(int region_count, int vehicle_count) {
  return 2 + 2 * region_count + 3 * vehicle_count;
}

VecXd featurize(const Env& env);

// {"schema": 1, "dim": D, "names": [...]} describing the layout above.
std::string feature_schema_json(int region_count, int vehicle_count);

}  // namespace sdd
