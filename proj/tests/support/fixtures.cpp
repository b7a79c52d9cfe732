#include "fixtures.hpp"

#include <algorithm>
#include <random>

#include "satcut/errors.hpp"

#ifndef SATCUT_TEST_DATA_DIR
#error "SATCUT_TEST_DATA_DIR must be defined by the build"
#endif

namespace satcut::testing {

std::string data_path(const std::string& name) {
    return std::string(SATCUT_TEST_DATA_DIR) + "/" + name;
}

Network five_bus() {
    std::vector<Bus> buses = {
        {1, 180}, {2, -300}, {3, -240}, {4, 210}, {5, 150}};
    std::vector<Branch> branches = {
        {0, 1, 2, 255, 2.0}, {1, 1, 3, 120, 1.0}, {2, 1, 5, 165, 2.0},
        {3, 2, 3, 195, 2.0}, {4, 3, 4, 250, 2.0}, {5, 3, 5, 165, 1.0},
        {6, 4, 5, 250, 2.0}};
    return Network(std::move(buses), std::move(branches));
}

std::vector<RouteStep> direct_script() {
    return {{5, 3, 150, {}}, {4, 3, 90, {}}, {4, 2, 120, {}}, {1, 2, 180, {}}};
}

std::vector<RouteStep> detour_script() {
    return {{5, 2, 150, {}},
            {1, 2, 60, {}},
            {1, 2, 90, {1, 3, 2}},
            {1, 3, 30, {}},
            {4, 3, 210, {}}};
}

int branch_between(const Network& net, int bus_a, int bus_b, int k) {
    int seen = 0;
    for (const Branch& b : net.branches()) {
        if ((b.from_bus == bus_a && b.to_bus == bus_b) ||
            (b.from_bus == bus_b && b.to_bus == bus_a)) {
            if (seen++ == k) return b.id;
        }
    }
    throw ValidationError("no branch " + std::to_string(bus_a) + "-" +
                          std::to_string(bus_b));
}

Network random_network(std::uint64_t seed, int min_buses, int max_buses) {
    std::mt19937_64 rng(seed);
    auto uniform_int = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    auto uniform = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    const int n = uniform_int(min_buses, max_buses);

    // ring through a random bus order, then chords (parallels allowed)
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i + 1;
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Branch> branches;
    auto add_branch = [&](int a, int b) {
        Branch br;
        br.id = static_cast<int>(branches.size());
        br.from_bus = a;
        br.to_bus = b;
        br.susceptance = uniform(0.5, 5.0);
        branches.push_back(br);
    };
    for (int i = 0; i < n; ++i) add_branch(order[i], order[(i + 1) % n]);
    const int chords = uniform_int(1, n);
    for (int c = 0; c < chords; ++c) {
        int a = uniform_int(1, n), b = uniform_int(1, n);
        if (a == b) continue;
        add_branch(a, b);
    }

    // balanced injections: a few round-valued sources, loads share the rest
    std::vector<Bus> buses;
    for (int i = 1; i <= n; ++i) buses.push_back({i, 0.0});
    const int sources = uniform_int(1, n / 2);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    double total = 0;
    for (int s = 0; s < sources; ++s) {
        double p = 0.25 * uniform_int(200, 1200);  // 50..300 MW
        buses[perm[s]].injection_mw = p;
        total += p;
    }
    double left = total;
    for (int s = sources; s < n; ++s) {
        bool last = (s == n - 1);
        double share = last ? left : 0.25 * uniform_int(0, static_cast<int>(
                                                               4 * left / 2));
        buses[perm[s]].injection_mw = -share;
        left -= share;
    }

    Network unlimited(buses, branches);
    FlowState dc = solve_dc(unlimited, unlimited.buses()[0].id);

    // ratings just above the DC flows keep the case feasible yet tight
    for (Branch& b : branches) {
        if (uniform(0, 1) < 0.1) {
            b.rating_mw = kUnlimitedMw;
            continue;
        }
        double slack = uniform(0.05, 0.6);
        b.rating_mw = std::abs(dc.branch_flow_mw[b.id]) * (1 + slack) + 5.0;
    }
    return Network(std::move(buses), std::move(branches));
}

Network synthetic_grid(int blocks) {
    Network base = load_case_file(data_path("case39.m"));
    const int stride = 100;  // block b bus i -> id b*stride + i
    const double tie_transfer_mw = 50;

    std::vector<Bus> buses;
    std::vector<Branch> branches;
    buses.reserve(blocks * base.bus_count());
    branches.reserve(blocks * base.branch_count() + blocks);

    for (int blk = 0; blk < blocks; ++blk) {
        for (const Bus& b : base.buses()) {
            double inj = b.injection_mw;
            if (b.id == 16) inj += tie_transfer_mw;   // exports to the ring
            if (b.id == 1) inj -= tie_transfer_mw;    // imports from it
            buses.push_back({blk * stride + b.id, inj});
        }
        for (const Branch& br : base.branches()) {
            Branch b = br;
            b.id = static_cast<int>(branches.size());
            b.from_bus = blk * stride + br.from_bus;
            b.to_bus = blk * stride + br.to_bus;
            branches.push_back(b);
        }
    }
    for (int blk = 0; blk < blocks; ++blk) {
        Branch tie;
        tie.id = static_cast<int>(branches.size());
        tie.from_bus = blk * stride + 16;
        tie.to_bus = ((blk + 1) % blocks) * stride + 1;
        tie.rating_mw = 1500;
        tie.susceptance = 1.0 / 0.05;
        branches.push_back(tie);
    }
    return Network(std::move(buses), std::move(branches));
}

}  // namespace satcut::testing
