#include "satcut/flow_builder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace satcut {

namespace {

// Routing engine shared by the pairing policies and the scripted builder.
// Flows are tracked directly; directional residuals are derived on demand
// (rating - f toward to_bus, rating + f toward from_bus), which makes
// cancellation of earlier flow a plain residual traversal.
class Router {
public:
    explicit Router(const Network& net)
        : net_(net),
          flow_(net.branch_count(), 0.0),
          supply_(net.bus_count(), 0.0),
          demand_(net.bus_count(), 0.0),
          parent_(net.bus_count(), -1) {
        for (int i = 0; i < net.bus_count(); ++i) {
            double inj = net.buses()[i].injection_mw;
            if (inj > 0)
                supply_[i] = inj;
            else
                demand_[i] = -inj;
        }
    }

    double residual(int branch_id, bool forward) const {
        const Branch& b = net_.branches()[branch_id];
        if (b.unlimited()) return kUnlimitedMw;
        return forward ? b.rating_mw - flow_[branch_id]
                       : b.rating_mw + flow_[branch_id];
    }

    double supply(int bus_index) const { return supply_[bus_index]; }
    double demand(int bus_index) const { return demand_[bus_index]; }

    // Route up to amount from src to snk along shortest unsaturated paths.
    // Returns the amount actually routed; supply/demand are not touched.
    double route(int src, int snk, double amount) {
        double routed = 0;
        while (amount - routed > kTolMw) {
            if (!bfs(src, snk)) break;
            routed += push(snk, amount - routed);
        }
        return routed;
    }

    // Apply a step along an explicit bus path. Among parallel branches the
    // lowest-id one with enough spare capacity is taken; no splitting.
    void route_explicit(std::span<const int> path, double amount) {
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            int u = net_.bus_index(path[i]);
            int v_id = path[i + 1];
            const Network::Arc* chosen = nullptr;
            for (const auto& arc : net_.arcs(u)) {
                if (net_.buses()[arc.other].id != v_id) continue;
                if (residual(arc.branch, arc.forward) >= amount - kTolMw) {
                    chosen = &arc;
                    break;
                }
            }
            if (!chosen)
                throw FlowError("path step " + std::to_string(path[i]) + "->" +
                                std::to_string(v_id) +
                                " lacks spare capacity for " +
                                std::to_string(amount) + " MW");
            flow_[chosen->branch] += chosen->forward ? amount : -amount;
        }
    }

    void consume(int src, int snk, double amount) {
        supply_[src] -= amount;
        demand_[snk] -= amount;
    }

    // Final feasibility pass: augment from any remaining supply to any
    // remaining demand until all demand is served. Returns false when no
    // augmenting path remains but demand is still unserved.
    bool drain_remaining() {
        while (true) {
            int snk = -1;
            for (int i = 0; i < net_.bus_count() && snk < 0; ++i)
                if (demand_[i] > kTolMw) snk = i;
            if (snk < 0) return true;
            int src = multi_source_bfs(snk);
            if (src < 0) return false;
            double amount = push(snk, std::min(supply_[src], demand_[snk]));
            consume(src, snk, amount);
        }
    }

    FlowState take() { return FlowState{std::move(flow_)}; }

private:
    bool bfs(int src, int snk) {
        std::fill(parent_.begin(), parent_.end(), -1);
        parent_[src] = -2;
        queue_.assign(1, src);
        for (size_t qi = 0; qi < queue_.size(); ++qi) {
            int u = queue_[qi];
            for (const auto& arc : net_.arcs(u)) {
                if (parent_[arc.other] != -1) continue;
                if (residual(arc.branch, arc.forward) <= kTolMw) continue;
                parent_[arc.other] = arc_index(u, arc);
                if (arc.other == snk) return true;
                queue_.push_back(arc.other);
            }
        }
        return false;
    }

    // BFS from every supply bus at once; returns the supply bus that first
    // reaches snk (lowest bus id among equals thanks to sorted seeding).
    int multi_source_bfs(int snk) {
        std::fill(parent_.begin(), parent_.end(), -1);
        queue_.clear();
        for (int i = 0; i < net_.bus_count(); ++i) {
            if (supply_[i] > kTolMw) {
                parent_[i] = -2;
                queue_.push_back(i);
            }
        }
        origin_.assign(net_.bus_count(), -1);
        for (size_t qi = 0; qi < queue_.size(); ++qi) {
            int u = queue_[qi];
            int root = origin_[u] >= 0 ? origin_[u] : u;
            if (u == snk) return root;
            for (const auto& arc : net_.arcs(u)) {
                if (parent_[arc.other] != -1) continue;
                if (residual(arc.branch, arc.forward) <= kTolMw) continue;
                parent_[arc.other] = arc_index(u, arc);
                origin_[arc.other] = root;
                queue_.push_back(arc.other);
            }
        }
        return -1;
    }

    // Walk parents from snk back to the BFS root, apply the bottleneck.
    double push(int snk, double cap) {
        double bottleneck = cap;
        for (int v = snk; parent_[v] != -2;) {
            auto [u, branch, forward] = decode(parent_[v]);
            bottleneck = std::min(bottleneck, residual(branch, forward));
            v = u;
        }
        for (int v = snk; parent_[v] != -2;) {
            auto [u, branch, forward] = decode(parent_[v]);
            flow_[branch] += forward ? bottleneck : -bottleneck;
            v = u;
        }
        return bottleneck;
    }

    // Parent encoding: index of the arc within the flattened adjacency of
    // its tail bus, packed with the tail bus index.
    int arc_index(int tail, const Network::Arc& arc) {
        auto span = net_.arcs(tail);
        int off = static_cast<int>(&arc - span.data());
        return tail * stride() + off;
    }

    std::tuple<int, int, bool> decode(int code) const {
        int tail = code / stride();
        int off = code % stride();
        const auto& arc = net_.arcs(tail)[off];
        return {tail, arc.branch, arc.forward};
    }

    int stride() const { return 2 * net_.branch_count() + 1; }

    const Network& net_;
    std::vector<double> flow_;
    std::vector<double> supply_, demand_;
    std::vector<int> parent_;
    std::vector<int> origin_;
    std::vector<int> queue_;
};

void require_buildable(const Network& net) {
    if (std::abs(net.injection_sum_mw()) > kTolMw)
        throw FlowError("network is not balanced (mismatch " +
                        std::to_string(net.injection_sum_mw()) + " MW)");
    if (connected_components(net).size() != 1)
        throw FlowError("network is not connected");
}

}  // namespace

FlowState build_flow(const Network& net, const RoutingPolicy& policy) {
    require_buildable(net);
    Router router(net);
    const int n = net.bus_count();

    if (policy.order == PairingOrder::AscendingBusId) {
        // buses() is sorted by id, so index order is id order
        for (int si = 0; si < n; ++si) {
            if (router.supply(si) <= kTolMw) continue;
            for (int ti = 0; ti < n && router.supply(si) > kTolMw; ++ti) {
                if (router.demand(ti) <= kTolMw) continue;
                double want = std::min(router.supply(si), router.demand(ti));
                double got = router.route(si, ti, want);
                router.consume(si, ti, got);
                // a short route means no path is left for this pair; the
                // next sink (or the drain pass) picks up the remainder
            }
        }
    } else {
        std::mt19937_64 rng(policy.seed);
        std::vector<std::pair<int, int>> dead;
        while (true) {
            std::vector<std::pair<int, int>> live;
            for (int si = 0; si < n; ++si) {
                if (router.supply(si) <= kTolMw) continue;
                for (int ti = 0; ti < n; ++ti) {
                    if (router.demand(ti) <= kTolMw) continue;
                    if (std::find(dead.begin(), dead.end(),
                                  std::make_pair(si, ti)) == dead.end())
                        live.emplace_back(si, ti);
                }
            }
            if (live.empty()) break;
            auto [si, ti] =
                live[std::uniform_int_distribution<size_t>(0, live.size() - 1)(rng)];
            double want = std::min(router.supply(si), router.demand(ti));
            double got = router.route(si, ti, want);
            router.consume(si, ti, got);
            if (got < want - kTolMw) dead.emplace_back(si, ti);
        }
    }

    if (!router.drain_remaining())
        throw FlowError(
            "no valid flow exists: demand cannot be served within ratings");
    return router.take();
}

FlowState build_flow_scripted(const Network& net,
                              std::span<const RouteStep> steps) {
    require_buildable(net);
    Router router(net);
    for (size_t k = 0; k < steps.size(); ++k) {
        const RouteStep& step = steps[k];
        int si = net.bus_index(step.source_bus);
        int ti = net.bus_index(step.sink_bus);
        if (step.amount_mw <= 0)
            throw FlowError("script step " + std::to_string(k) +
                            ": amount must be positive");
        if (router.supply(si) < step.amount_mw - kTolMw)
            throw FlowError("script step " + std::to_string(k) + ": bus " +
                            std::to_string(step.source_bus) +
                            " has insufficient remaining supply");
        if (router.demand(ti) < step.amount_mw - kTolMw)
            throw FlowError("script step " + std::to_string(k) + ": bus " +
                            std::to_string(step.sink_bus) +
                            " has insufficient remaining demand");
        if (step.path.empty()) {
            double got = router.route(si, ti, step.amount_mw);
            if (got < step.amount_mw - kTolMw)
                throw FlowError("script step " + std::to_string(k) +
                                ": only " + std::to_string(got) + " of " +
                                std::to_string(step.amount_mw) +
                                " MW routable");
        } else {
            if (step.path.front() != step.source_bus ||
                step.path.back() != step.sink_bus)
                throw FlowError("script step " + std::to_string(k) +
                                ": path endpoints do not match the pair");
            router.route_explicit(step.path, step.amount_mw);
        }
        router.consume(si, ti, step.amount_mw);
    }
    // a script that under-serves demand is completed by augmentation
    if (!router.drain_remaining())
        throw FlowError("script cannot be completed to a valid flow");
    return router.take();
}

std::vector<FlowViolation> verify_flow(const Network& net,
                                       const FlowState& fs) {
    std::vector<FlowViolation> out;
    if (fs.branch_flow_mw.size() != static_cast<size_t>(net.branch_count()))
        throw ValidationError("flow vector does not match the branch list");

    std::vector<double> net_in(net.bus_count(), 0.0);
    for (int i = 0; i < net.bus_count(); ++i)
        net_in[i] = net.buses()[i].injection_mw;
    for (const Branch& b : net.branches()) {
        double f = fs.branch_flow_mw[b.id];
        net_in[net.bus_index(b.from_bus)] -= f;
        net_in[net.bus_index(b.to_bus)] += f;
        if (!b.unlimited() && std::abs(f) > b.rating_mw + kTolMw)
            out.push_back({FlowViolation::Kind::Capacity, b.id,
                           std::abs(f) - b.rating_mw});
    }
    for (int i = 0; i < net.bus_count(); ++i) {
        if (std::abs(net_in[i]) > kTolMw)
            out.push_back({FlowViolation::Kind::Conservation,
                           net.buses()[i].id, std::abs(net_in[i])});
    }
    return out;
}

std::string to_flow_tsv(const Network& net, const FlowState& fs) {
    std::ostringstream os;
    os.precision(17);
    for (const Branch& b : net.branches())
        os << "flow " << b.id << " " << b.from_bus << " " << b.to_bus << " "
           << fs.branch_flow_mw[b.id] << "\n";
    return os.str();
}

}  // namespace satcut
