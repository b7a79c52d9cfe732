#include "satcut/ft_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include <json.hpp>

namespace satcut {

namespace {

void require_flow_size(const Network& net, const FlowState& fs) {
    if (fs.branch_flow_mw.size() != static_cast<size_t>(net.branch_count()))
        throw ValidationError("flow vector does not match the branch list");
}

// membership flags for side C1; must be a nonempty proper subset
std::vector<char> membership(const Network& net,
                             std::span<const int> side_c1_bus_ids) {
    std::vector<char> in_c1(net.bus_count(), 0);
    int distinct = 0;
    for (int bus_id : side_c1_bus_ids) {
        char& flag = in_c1[net.bus_index(bus_id)];
        distinct += !flag;
        flag = 1;
    }
    if (distinct == 0 || distinct == net.bus_count())
        throw ValidationError("side C1 must be a nonempty proper bus subset");
    return in_c1;
}

// Cut evaluation shared by evaluate_cut, extract_cut and the brute-force
// oracle: F_K from the base flow, post-outage capacity from the ratings.
CutSet assemble_cut(const Network& net, const FlowState& fs,
                    int outage_branch, const std::vector<char>& in_c1) {
    CutSet cut;
    for (int i = 0; i < net.bus_count(); ++i)
        if (in_c1[i]) cut.side_c1.push_back(net.buses()[i].id);

    double transfer = 0, capacity = 0;
    for (const Branch& b : net.branches()) {
        bool f1 = in_c1[net.bus_index(b.from_bus)];
        bool t1 = in_c1[net.bus_index(b.to_bus)];
        if (f1 == t1) continue;
        cut.branches.push_back(b.id);
        transfer += f1 ? fs.branch_flow_mw[b.id] : -fs.branch_flow_mw[b.id];
        if (b.id != outage_branch) capacity += b.rating_mw;
    }
    cut.transfer_mw = transfer;
    cut.capacity_post_outage_mw = capacity;
    cut.margin_mw = capacity - transfer;
    return cut;
}

struct BfsScratch {
    std::vector<int> parent;  // -1 unseen, -2 root, else packed arc
    std::vector<int> queue;
};

}  // namespace

double cut_transfer(const Network& net, const FlowState& fs,
                    std::span<const int> side_c1_bus_ids) {
    require_flow_size(net, fs);
    auto in_c1 = membership(net, side_c1_bus_ids);
    double transfer = 0;
    for (const Branch& b : net.branches()) {
        bool f1 = in_c1[net.bus_index(b.from_bus)];
        bool t1 = in_c1[net.bus_index(b.to_bus)];
        if (f1 == t1) continue;
        transfer += f1 ? fs.branch_flow_mw[b.id] : -fs.branch_flow_mw[b.id];
    }
    return transfer;
}

ResidualView make_residual(const Network& net, const FlowState& fs,
                           int outage_branch) {
    require_flow_size(net, fs);
    const Branch& out = net.branch(outage_branch);

    ResidualView rv;
    rv.removed_branch = outage_branch;
    double f_out = fs.branch_flow_mw[outage_branch];
    rv.origin_bus = f_out >= 0 ? out.from_bus : out.to_bus;
    rv.terminus_bus = f_out >= 0 ? out.to_bus : out.from_bus;

    rv.toward_to.resize(net.branch_count());
    rv.toward_from.resize(net.branch_count());
    for (const Branch& b : net.branches()) {
        if (b.id == outage_branch) {
            rv.toward_to[b.id] = rv.toward_from[b.id] = 0;
            continue;
        }
        if (b.unlimited()) {
            rv.toward_to[b.id] = rv.toward_from[b.id] = kUnlimitedMw;
            continue;
        }
        double f = fs.branch_flow_mw[b.id];
        if (std::abs(f) > b.rating_mw + kTolMw)
            throw ValidationError("branch " + std::to_string(b.id) +
                                  " exceeds its rating in the base flow");
        // sub-tolerance overshoot must not spawn negative residuals
        rv.toward_to[b.id] = std::max(0.0, b.rating_mw - f);
        rv.toward_from[b.id] = std::max(0.0, b.rating_mw + f);
    }
    return rv;
}

namespace {

bool residual_bfs(const Network& net, const ResidualView& rv, int src,
                  int snk, BfsScratch& s) {
    s.parent.assign(net.bus_count(), -1);
    s.parent[src] = -2;
    s.queue.assign(1, src);
    const int stride = 2 * net.branch_count() + 1;
    for (size_t qi = 0; qi < s.queue.size(); ++qi) {
        int u = s.queue[qi];
        auto arcs = net.arcs(u);
        for (size_t k = 0; k < arcs.size(); ++k) {
            const auto& arc = arcs[k];
            if (s.parent[arc.other] != -1) continue;
            if (arc.branch == rv.removed_branch) continue;
            if (rv.residual(arc.branch, arc.forward) <= kTolMw) continue;
            s.parent[arc.other] = u * stride + static_cast<int>(k);
            if (arc.other == snk) return true;
            s.queue.push_back(arc.other);
        }
    }
    return false;
}

double augment(const Network& net, ResidualView& rv, int snk, double cap,
               const BfsScratch& s) {
    const int stride = 2 * net.branch_count() + 1;
    double bottleneck = cap;
    for (int v = snk; s.parent[v] != -2;) {
        int u = s.parent[v] / stride;
        const auto& arc = net.arcs(u)[s.parent[v] % stride];
        bottleneck =
            std::min(bottleneck, rv.residual(arc.branch, arc.forward));
        v = u;
    }
    for (int v = snk; s.parent[v] != -2;) {
        int u = s.parent[v] / stride;
        const auto& arc = net.arcs(u)[s.parent[v] % stride];
        if (net.branches()[arc.branch].unlimited()) {
            v = u;
            continue;
        }
        if (arc.forward) {
            rv.toward_to[arc.branch] -= bottleneck;
            rv.toward_from[arc.branch] += bottleneck;
        } else {
            rv.toward_from[arc.branch] -= bottleneck;
            rv.toward_to[arc.branch] += bottleneck;
        }
        v = u;
    }
    return bottleneck;
}

std::vector<char> reachable_from_origin(const Network& net,
                                        const ResidualView& rv) {
    std::vector<char> seen(net.bus_count(), 0);
    std::vector<int> stack{net.bus_index(rv.origin_bus)};
    seen[stack[0]] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const auto& arc : net.arcs(u)) {
            if (seen[arc.other]) continue;
            if (arc.branch == rv.removed_branch) continue;
            if (rv.residual(arc.branch, arc.forward) <= kTolMw) continue;
            seen[arc.other] = 1;
            stack.push_back(arc.other);
        }
    }
    return seen;
}

}  // namespace

CutSet extract_cut(const ResidualView& rv, const Network& net,
                   const FlowState& fs) {
    require_flow_size(net, fs);
    auto seen = reachable_from_origin(net, rv);
    if (seen[net.bus_index(rv.terminus_bus)])
        throw Error("extract_cut called while an augmenting path remains");
    return assemble_cut(net, fs, rv.removed_branch, seen);
}

FtReport feasibility_test(const Network& net, const FlowState& fs,
                          int outage_branch) {
    ResidualView rv = make_residual(net, fs, outage_branch);

    FtReport report;
    report.outaged_branch = outage_branch;
    report.flow_mw = std::abs(fs.branch_flow_mw[outage_branch]);
    if (report.flow_mw <= kTolMw) return report;  // nothing to reroute

    const int src = net.bus_index(rv.origin_bus);
    const int snk = net.bus_index(rv.terminus_bus);
    BfsScratch scratch;
    double rerouted = 0;
    while (report.flow_mw - rerouted > kTolMw) {
        if (!residual_bfs(net, rv, src, snk, scratch)) break;
        rerouted += augment(net, rv, snk, report.flow_mw - rerouted, scratch);
    }
    report.rerouted_mw = rerouted;
    report.margin_mw = rerouted - report.flow_mw;
    if (report.margin_mw < -kTolMw) {
        report.critical_cut = extract_cut(rv, net, fs);
    } else {
        // fully reroutable within the saturation threshold
        report.rerouted_mw = report.flow_mw;
        report.margin_mw = 0.0;
    }
    return report;
}

std::vector<FtReport> screen_n_minus_1(const Network& net,
                                       const FlowState& fs, int threads) {
    require_flow_size(net, fs);
    // reject invalid base flows up front; workers must not throw
    for (const Branch& b : net.branches()) {
        if (!b.unlimited() &&
            std::abs(fs.branch_flow_mw[b.id]) > b.rating_mw + kTolMw)
            throw ValidationError("branch " + std::to_string(b.id) +
                                  " exceeds its rating in the base flow");
    }
    const int m = net.branch_count();
    std::vector<FtReport> reports(m);

    if (threads <= 0)
        threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, std::max(1, m));

    if (threads == 1) {
        for (int b = 0; b < m; ++b)
            reports[b] = feasibility_test(net, fs, b);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (int b = t; b < m; b += threads)
                    reports[b] = feasibility_test(net, fs, b);
            });
        }
        for (auto& th : pool) th.join();
    }

    std::sort(reports.begin(), reports.end(),
              [](const FtReport& a, const FtReport& b) {
                  if (a.margin_mw != b.margin_mw)
                      return a.margin_mw < b.margin_mw;
                  return a.outaged_branch < b.outaged_branch;
              });
    return reports;
}

CutSet evaluate_cut(const Network& net, const FlowState& fs,
                    int outage_branch, std::span<const int> side_c1_bus_ids) {
    require_flow_size(net, fs);
    net.branch(outage_branch);
    return assemble_cut(net, fs, outage_branch,
                        membership(net, side_c1_bus_ids));
}

std::pair<double, CutSet> brute_force_margin(const Network& net,
                                             const FlowState& fs,
                                             int outage_branch) {
    require_flow_size(net, fs);
    const int n = net.bus_count();
    if (n > 20)
        throw ValidationError(
            "brute-force cut enumeration is limited to 20 buses");
    const Branch& out = net.branch(outage_branch);
    double f_out = fs.branch_flow_mw[outage_branch];
    int origin = net.bus_index(f_out >= 0 ? out.from_bus : out.to_bus);
    int terminus = net.bus_index(f_out >= 0 ? out.to_bus : out.from_bus);

    // free buses: everything except the fixed origin (C1) / terminus (C2)
    std::vector<int> free;
    for (int i = 0; i < n; ++i)
        if (i != origin && i != terminus) free.push_back(i);

    const auto& branches = net.branches();
    std::vector<int> from_idx(branches.size()), to_idx(branches.size());
    for (const Branch& b : branches) {
        from_idx[b.id] = net.bus_index(b.from_bus);
        to_idx[b.id] = net.bus_index(b.to_bus);
    }

    double best = kUnlimitedMw;
    std::vector<char> best_c1;
    std::vector<char> in_c1(n, 0);
    const std::uint32_t count = 1u << free.size();
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        std::fill(in_c1.begin(), in_c1.end(), 0);
        in_c1[origin] = 1;
        for (size_t k = 0; k < free.size(); ++k)
            if (mask & (1u << k)) in_c1[free[k]] = 1;

        double transfer = 0, capacity = 0;
        for (const Branch& b : branches) {
            bool f1 = in_c1[from_idx[b.id]];
            if (f1 == static_cast<bool>(in_c1[to_idx[b.id]])) continue;
            transfer += f1 ? fs.branch_flow_mw[b.id] : -fs.branch_flow_mw[b.id];
            if (b.id != outage_branch) {
                capacity += b.rating_mw;
                if (!std::isfinite(capacity)) break;
            }
        }
        double margin = capacity - transfer;  // +inf across unlimited cuts
        if (best_c1.empty()) {
            best = margin;
            best_c1 = in_c1;
        } else if (margin < best - kTolMw) {
            best = margin;
            best_c1 = in_c1;
        } else if (std::isfinite(margin) && margin < best + kTolMw) {
            // tie: keep the lexicographically smallest C1. Membership flags
            // run over ascending bus ids, so the set holding the smaller id
            // at the first difference wins.
            if (std::lexicographical_compare(in_c1.begin(), in_c1.end(),
                                             best_c1.begin(), best_c1.end(),
                                             std::greater<char>()))
                best_c1 = in_c1;
        }
    }
    return {best, assemble_cut(net, fs, outage_branch, best_c1)};
}

std::string to_json(const Network& net, const FtReport& report) {
    using json = nlohmann::ordered_json;
    const Branch& b = net.branch(report.outaged_branch);
    json j;
    j["branch"] = {{"id", b.id}, {"from", b.from_bus}, {"to", b.to_bus}};
    j["flow_mw"] = report.flow_mw;
    j["rerouted_mw"] = report.rerouted_mw;
    j["margin_mw"] = report.margin_mw;
    j["saturated"] = report.saturated();
    if (report.critical_cut) {
        const CutSet& c = *report.critical_cut;
        j["critical_cut"] = {{"branches", c.branches},
                             {"side_c1", c.side_c1},
                             {"transfer_mw", c.transfer_mw},
                             {"capacity_post_outage_mw",
                              c.capacity_post_outage_mw}};
    } else {
        j["critical_cut"] = nullptr;
    }
    return j.dump();
}

}  // namespace satcut
