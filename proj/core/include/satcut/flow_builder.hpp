#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "satcut/net_model.hpp"

namespace satcut {

/// One valid graph-based flow solution: signed MW per branch, positive in
/// the branch's from->to orientation. Valid means conservation holds at
/// every bus and no branch exceeds its rating (see verify_flow).
struct FlowState {
    std::vector<double> branch_flow_mw;  // indexed by branch id

    double flow(int branch_id) const { return branch_flow_mw[branch_id]; }
};

enum class PairingOrder {
    AscendingBusId,  // sources ascending, sinks ascending, exhaust each pair
    Random,          // uniform over live source-sink pairs, seeded
};

struct RoutingPolicy {
    PairingOrder order = PairingOrder::AscendingBusId;
    std::uint64_t seed = 0;  // used by PairingOrder::Random only
};

/// Build a valid flow by repeatedly routing supply to demand along shortest
/// unsaturated paths (BFS, neighbors in ascending bus-id order). Residuals
/// include cancellation arcs, so routing earlier flow backwards is allowed;
/// if pairwise routing stalls, a final multi-source augmentation pass
/// finishes the job whenever a feasible flow exists.
///
/// Throws FlowError when the network is unbalanced, disconnected, or no
/// valid flow exists within the branch ratings.
FlowState build_flow(const Network& net, const RoutingPolicy& policy = {});

/// One step of an explicit routing script: move amount_mw from a source bus
/// to a sink bus, either along the given bus path or along BFS shortest
/// unsaturated paths when the path is empty.
struct RouteStep {
    int source_bus = 0;
    int sink_bus = 0;
    double amount_mw = 0;
    std::vector<int> path;  // optional explicit route, e.g. {1, 3, 2}
};

/// Replay an explicit routing script (used to pin down a specific flow
/// graph in tests and fixtures). Steps that under-serve demand are
/// completed by augmentation; a script that cannot be applied or completed
/// is a FlowError.
FlowState build_flow_scripted(const Network& net,
                              std::span<const RouteStep> steps);

struct FlowViolation {
    enum class Kind { Conservation, Capacity };
    Kind kind;
    int id;               // bus id (conservation) or branch id (capacity)
    double magnitude_mw;  // size of the violation
};

/// Empty iff the flow satisfies conservation at every bus and every finite
/// rating, both within kTolMw.
std::vector<FlowViolation> verify_flow(const Network& net,
                                       const FlowState& fs);

/// One "flow <branch_id> <from> <to> <MW>" line per branch.
std::string to_flow_tsv(const Network& net, const FlowState& fs);

}  // namespace satcut
