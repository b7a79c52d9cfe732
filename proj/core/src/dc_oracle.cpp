#include "satcut/dc_oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <json.hpp>

namespace satcut {

namespace {

// Nodal solve with one branch optionally skipped (for contingencies the
// reduced system is rebuilt and refactorized from scratch; no factor reuse).
FlowState solve_reduced(const Network& net, int reference_bus,
                        int skip_branch, DcModel* model_out) {
    const int n = net.bus_count();
    const int ref = net.bus_index(reference_bus);

    if (std::abs(net.injection_sum_mw()) > kTolMw)
        throw SolveError("injections are not balanced");

    for (const Branch& b : net.branches()) {
        if (b.id == skip_branch) continue;
        if (!b.susceptance)
            throw SolveError("branch " + std::to_string(b.id) + " (" +
                             std::to_string(b.from_bus) + "-" +
                             std::to_string(b.to_bus) +
                             ") has no susceptance");
    }

    // row/col compaction that skips the reference bus
    std::vector<int> red(n);
    int r = 0;
    for (int i = 0; i < n; ++i) red[i] = (i == ref) ? -1 : r++;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(4 * net.branch_count());
    for (const Branch& b : net.branches()) {
        if (b.id == skip_branch) continue;
        double y = *b.susceptance;
        int i = red[net.bus_index(b.from_bus)];
        int j = red[net.bus_index(b.to_bus)];
        if (i >= 0) trips.emplace_back(i, i, y);
        if (j >= 0) trips.emplace_back(j, j, y);
        if (i >= 0 && j >= 0) {
            trips.emplace_back(i, j, -y);
            trips.emplace_back(j, i, -y);
        }
    }
    Eigen::SparseMatrix<double> B(n - 1, n - 1);
    B.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd p(n - 1);
    for (int i = 0; i < n; ++i)
        if (red[i] >= 0) p[red[i]] = net.buses()[i].injection_mw;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(B);
    if (solver.info() != Eigen::Success)
        throw SolveError("nodal system is singular (network disconnected?)");
    Eigen::VectorXd theta_red = solver.solve(p);
    if (solver.info() != Eigen::Success)
        throw SolveError("nodal solve failed");

    std::vector<double> theta(n, 0.0);
    for (int i = 0; i < n; ++i)
        if (red[i] >= 0) theta[i] = theta_red[red[i]];

    FlowState fs;
    fs.branch_flow_mw.assign(net.branch_count(), 0.0);
    for (const Branch& b : net.branches()) {
        if (b.id == skip_branch) continue;
        fs.branch_flow_mw[b.id] =
            *b.susceptance *
            (theta[net.bus_index(b.from_bus)] - theta[net.bus_index(b.to_bus)]);
    }
    if (model_out) {
        model_out->reference_bus = reference_bus;
        model_out->bus_angle = std::move(theta);
    }
    return fs;
}

bool connected_without(const Network& net, int skip_branch) {
    const int n = net.bus_count();
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const auto& arc : net.arcs(u)) {
            if (arc.branch == skip_branch || seen[arc.other]) continue;
            seen[arc.other] = 1;
            ++count;
            stack.push_back(arc.other);
        }
    }
    return count == n;
}

}  // namespace

FlowState solve_dc(const Network& net, int reference_bus, DcModel* model_out) {
    if (connected_components(net).size() != 1)
        throw SolveError("network is not connected");
    return solve_reduced(net, reference_bus, -1, model_out);
}

std::vector<Overload> dc_contingency(const Network& net, int outage_branch,
                                     int reference_bus) {
    const Branch& out = net.branch(outage_branch);
    if (!connected_without(net, outage_branch))
        throw SolveError("outage of branch " + std::to_string(out.id) + " (" +
                         std::to_string(out.from_bus) + "-" +
                         std::to_string(out.to_bus) +
                         ") islands the network");
    FlowState fs = solve_reduced(net, reference_bus, outage_branch, nullptr);

    std::vector<Overload> overloads;
    for (const Branch& b : net.branches()) {
        if (b.id == outage_branch || b.unlimited()) continue;
        double f = std::abs(fs.branch_flow_mw[b.id]);
        if (f > b.rating_mw + kTolMw)
            overloads.push_back({b.id, fs.branch_flow_mw[b.id], b.rating_mw,
                                 f - b.rating_mw});
    }
    return overloads;
}

Network apply_redispatch(const Network& net,
                         std::span<const std::pair<int, double>> deltas_mw) {
    double sum = 0;
    for (const auto& [bus_id, delta] : deltas_mw) {
        net.bus_index(bus_id);  // validates the id
        sum += delta;
    }
    if (std::abs(sum) > kTolMw)
        throw BalanceError("redispatch deltas sum to " + std::to_string(sum) +
                           " MW, expected 0");
    std::vector<double> inj;
    inj.reserve(net.bus_count());
    for (const Bus& b : net.buses()) inj.push_back(b.injection_mw);
    for (const auto& [bus_id, delta] : deltas_mw)
        inj[net.bus_index(bus_id)] += delta;
    return net.with_injections(std::move(inj));
}

std::string to_json(const Network& net, int outage_branch,
                    std::span<const Overload> overloads) {
    using json = nlohmann::ordered_json;
    json j;
    j["outage"] = outage_branch;
    j["overloads"] = json::array();
    for (const Overload& o : overloads) {
        net.branch(o.branch);  // validates the id
        j["overloads"].push_back({{"branch", o.branch},
                                  {"flow_mw", o.flow_mw},
                                  {"rating_mw", o.rating_mw},
                                  {"excess_mw", o.excess_mw}});
    }
    return j.dump();
}

}  // namespace satcut
