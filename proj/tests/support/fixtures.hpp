#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "satcut/dc_oracle.hpp"
#include "satcut/flow_builder.hpp"
#include "satcut/net_model.hpp"

namespace satcut::testing {

std::string data_path(const std::string& name);

/// The bundled five-bus study system (same data as tests/data/fivebus.tsv):
/// injections {1:+180, 2:-300, 3:-240, 4:+210, 5:+150}, branch order
/// 1-2, 1-3, 1-5, 2-3, 3-4, 3-5, 4-5.
Network five_bus();

/// Two fixed routing scripts for the five-bus system. The direct script
/// serves each sink from the nearest source; the detour script sends the
/// eastern generation around through bus 1 and leans on the 1-3-2 path.
/// Both produce valid flows with different per-branch values, which makes
/// them good probes for flow-independence checks.
std::vector<RouteStep> direct_script();
std::vector<RouteStep> detour_script();

/// Branch id by endpoints (either orientation); k selects among parallel
/// branches in file order. Throws if absent.
int branch_between(const Network& net, int bus_a, int bus_b, int k = 0);

/// Random connected test network: a ring through all buses plus random
/// chords (so single outages never island), balanced injections, random
/// susceptances, and finite ratings derived from a DC solve so that a valid
/// flow always exists and saturations still occur. ~10% of branches are
/// left unlimited.
Network random_network(std::uint64_t seed, int min_buses = 6,
                       int max_buses = 12);

/// Large deterministic benchmark case: `blocks` copies of the 39-bus test
/// system, tied into a ring with inter-block transfers so the ties carry
/// flow. 64 blocks gives 2496 buses / 3008 branches.
Network synthetic_grid(int blocks);

}  // namespace satcut::testing
