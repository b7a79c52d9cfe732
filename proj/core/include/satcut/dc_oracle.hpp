#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "satcut/flow_builder.hpp"
#include "satcut/net_model.hpp"

namespace satcut {

/// Solved DC model: reference bus plus one angle per bus (indexed like
/// Network::buses(), reference angle 0). Angles are reference-relative and
/// live on an arbitrary scale -- branch flows are invariant under a common
/// scaling of all susceptances.
struct DcModel {
    int reference_bus = 0;
    std::vector<double> bus_angle;
};

/// Solve the nodal balance system B*theta = P with the reference row and
/// column removed; branch flow = susceptance * (theta_from - theta_to).
/// Requires a connected network, balanced injections and a susceptance on
/// every branch. The returned flows may exceed ratings -- the DC solution
/// ignores them by design.
FlowState solve_dc(const Network& net, int reference_bus,
                   DcModel* model_out = nullptr);

struct Overload {
    int branch = -1;
    double flow_mw = 0;
    double rating_mw = 0;
    double excess_mw = 0;  // |flow| - rating
};

/// Remove one branch, re-solve, and list every branch loaded above its
/// rating. Throws SolveError when the outage islands the network.
std::vector<Overload> dc_contingency(const Network& net, int outage_branch,
                                     int reference_bus);

/// New network with per-bus injection deltas applied. The deltas must sum
/// to zero (within kTolMw) so balance is preserved.
Network apply_redispatch(const Network& net,
                         std::span<const std::pair<int, double>> deltas_mw);

/// {"outage": id, "overloads": [{"branch","flow_mw","rating_mw","excess_mw"}]}
std::string to_json(const Network& net, int outage_branch,
                    std::span<const Overload> overloads);

}  // namespace satcut
