#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "satcut/flow_builder.hpp"
#include "satcut/net_model.hpp"

namespace satcut {

/// Directed spare capacities left on every branch after one branch is
/// removed. For a finite-rated branch carrying signed flow f:
///   toward to_bus   = rating - f
///   toward from_bus = rating + f
/// so the two always sum to 2*rating; augmentation preserves that.
/// Unlimited branches stay unlimited in both directions.
struct ResidualView {
    int removed_branch = -1;
    int origin_bus = 0;    // v_F: pre-outage flow left from here
    int terminus_bus = 0;  // v_T: ... and arrived here
    std::vector<double> toward_to;    // indexed by branch id
    std::vector<double> toward_from;

    double residual(int branch_id, bool forward) const {
        return forward ? toward_to[branch_id] : toward_from[branch_id];
    }
};

/// A set of branches splitting the network in two, evaluated against a
/// specific base flow and outage.
struct CutSet {
    std::vector<int> branches;  // sorted branch ids, removed branch included
    std::vector<int> side_c1;   // sorted bus ids on the origin side
    double transfer_mw = 0;     // F_K: signed base flow from C1 to C2
    double capacity_post_outage_mw = 0;  // sum of ratings minus the outage
    double margin_mw = 0;                // capacity_post_outage - transfer
};

/// Outcome of the feasibility test for one branch outage.
struct FtReport {
    int outaged_branch = -1;
    double flow_mw = 0;      // pre-outage |flow| on the branch (f_ft)
    double rerouted_mw = 0;  // total rerouted (TC), always in [0, flow_mw]
    double margin_mw = 0;    // T_m = rerouted - flow, in [-flow_mw, 0]
    std::optional<CutSet> critical_cut;  // present iff margin < -kTolMw

    bool saturated() const { return critical_cut.has_value(); }
};

/// Signed base flow crossing from side_c1 to the rest of the network; by
/// conservation this equals the net injection of side_c1.
double cut_transfer(const Network& net, const FlowState& fs,
                    std::span<const int> side_c1_bus_ids);

/// Remove one branch and expose the residual capacities of the rest.
/// origin/terminus are the removed branch's endpoints oriented along its
/// pre-outage flow (zero flow orients from_bus -> to_bus).
ResidualView make_residual(const Network& net, const FlowState& fs,
                           int outage_branch);

/// Decide whether the outage creates a saturated cut-set: reroute the
/// outaged branch's flow from origin to terminus along shortest unsaturated
/// residual paths (BFS), capped at the pre-outage flow. If the full amount
/// cannot be rerouted the margin is negative and the maximally saturated
/// cut-set is extracted and attached.
FtReport feasibility_test(const Network& net, const FlowState& fs,
                          int outage_branch);

/// After augmentation has stalled: buses reachable from the origin through
/// unsaturated residual arcs form side C1; the crossing branches plus the
/// removed branch form the cut. Transfer and margin are evaluated against
/// the original base flow. Throws Error if an augmenting path still exists.
CutSet extract_cut(const ResidualView& rv, const Network& net,
                   const FlowState& fs);

/// Feasibility test of every branch, sorted by margin ascending (ties by
/// branch id). threads <= 0 uses the available hardware parallelism.
std::vector<FtReport> screen_n_minus_1(const Network& net,
                                       const FlowState& fs, int threads = 0);

/// Evaluate one explicit bipartition as a CutSet for the given outage.
CutSet evaluate_cut(const Network& net, const FlowState& fs,
                    int outage_branch, std::span<const int> side_c1_bus_ids);

/// Independent oracle: enumerate every bipartition separating the outaged
/// branch's endpoints and return the minimum margin and its cut (ties:
/// lexicographically smallest C1). When every separating cut contains an
/// unlimited branch the margin is +infinity. Only for networks of at most
/// 20 buses.
std::pair<double, CutSet> brute_force_margin(const Network& net,
                                             const FlowState& fs,
                                             int outage_branch);

/// Report as a JSON object:
/// {"branch":{"id","from","to"},"flow_mw","rerouted_mw","margin_mw",
///  "saturated","critical_cut":{...}|null}
std::string to_json(const Network& net, const FtReport& report);

}  // namespace satcut
