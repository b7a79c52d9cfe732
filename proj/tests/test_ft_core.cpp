#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "fixtures.hpp"
#include "satcut/dc_oracle.hpp"
#include "satcut/ft_core.hpp"

using namespace satcut;
using testing::branch_between;
using testing::five_bus;

namespace {

std::vector<int> ids(const Network& net,
                     const std::vector<std::pair<int, int>>& pairs) {
    std::vector<int> out;
    for (auto [a, b] : pairs) out.push_back(branch_between(net, a, b));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("cut_transfer equals the net injection of side C1") {
    Network net = five_bus();
    std::vector<int> c1 = {4, 5};

    FlowState dc = solve_dc(net, 1);
    CHECK(cut_transfer(net, dc, c1) == doctest::Approx(360));

    FlowState fig3 = build_flow_scripted(net, testing::detour_script());
    CHECK(cut_transfer(net, fig3, c1) == doctest::Approx(360));

    SUBCASE("complement of a zero-injection bus transfers nothing") {
        std::vector<Bus> buses = {{1, 100}, {2, 0}, {3, -100}};
        std::vector<Branch> branches = {{0, 1, 2, kUnlimitedMw, {}},
                                        {1, 2, 3, kUnlimitedMw, {}}};
        Network line(buses, branches);
        FlowState fs = build_flow(line);
        std::vector<int> others = {1, 3};
        CHECK(cut_transfer(line, fs, others) ==
              doctest::Approx(0).epsilon(1e-12));
    }
    SUBCASE("rejects unknown ids and degenerate sides") {
        std::vector<int> bad = {4, 9};
        CHECK_THROWS_AS(cut_transfer(net, dc, bad), ValidationError);
        std::vector<int> empty;
        CHECK_THROWS_AS(cut_transfer(net, dc, empty), ValidationError);
        std::vector<int> all = {1, 2, 3, 4, 5};
        CHECK_THROWS_AS(cut_transfer(net, dc, all), ValidationError);
    }
}

TEST_CASE("make_residual orients the outage along its flow") {
    Network net = five_bus();
    FlowState dc = solve_dc(net, 1);
    const int b34 = branch_between(net, 3, 4);
    const int b45 = branch_between(net, 4, 5);

    ResidualView rv = make_residual(net, dc, b34);
    CHECK(rv.removed_branch == b34);
    CHECK(rv.origin_bus == 4);  // 195 MW flowed 4 -> 3
    CHECK(rv.terminus_bus == 3);
    // branch 4-5 carried 15 MW toward 5
    CHECK(rv.residual(b45, true) == doctest::Approx(235));
    CHECK(rv.residual(b45, false) == doctest::Approx(265));
    // the removed branch is rendered impassable
    CHECK(rv.residual(b34, true) == 0);
    CHECK(rv.residual(b34, false) == 0);

    SUBCASE("forward + backward = 2 * rating on finite branches") {
        for (const Branch& b : net.branches()) {
            if (b.id == b34) continue;
            CHECK(rv.residual(b.id, true) + rv.residual(b.id, false) ==
                  doctest::Approx(2 * b.rating_mw));
        }
    }
}

TEST_CASE("make_residual edge cases") {
    std::vector<Bus> buses = {{1, 100}, {2, -100}};
    std::vector<Branch> branches = {{0, 1, 2, 100, {}}, {1, 1, 2, 100, {}}};
    Network net(buses, branches);

    SUBCASE("zero-flow branch keeps rating both ways, origin is from_bus") {
        FlowState fs{{100, 0}};
        ResidualView rv = make_residual(net, fs, 1);
        CHECK(rv.origin_bus == 1);
        CHECK(rv.terminus_bus == 2);
        CHECK(rv.residual(0, true) == doctest::Approx(0));
        CHECK(rv.residual(0, false) == doctest::Approx(200));
    }
    SUBCASE("branch at exactly its rating") {
        FlowState fs{{100, 0}};
        ResidualView rv = make_residual(net, fs, 1);
        CHECK(rv.residual(0, true) == doctest::Approx(0));
        CHECK(rv.residual(0, false) == doctest::Approx(2 * 100));
    }
    SUBCASE("invalid base flow is rejected") {
        FlowState fs{{130, -30}};
        CHECK_THROWS_AS(make_residual(net, fs, 1), ValidationError);
    }
    SUBCASE("unknown branch") {
        FlowState fs{{50, 50}};
        CHECK_THROWS_AS(make_residual(net, fs, 7), ValidationError);
    }
}

TEST_CASE("feasibility test finds the 30 MW saturation for outage 3-4") {
    Network net = five_bus();
    const int b34 = branch_between(net, 3, 4);
    const auto cut_ids = ids(net, {{3, 4}, {3, 5}, {1, 5}});

    struct Case {
        const char* name;
        FlowState fs;
        double f_ft;
        double rerouted;
    };
    std::vector<Case> cases;
    cases.push_back({"dc", solve_dc(net, 1), 195, 165});
    cases.push_back(
        {"fig2", build_flow_scripted(net, testing::direct_script()), 210, 180});
    cases.push_back(
        {"fig3", build_flow_scripted(net, testing::detour_script()), 210, 180});

    for (const auto& c : cases) {
        CAPTURE(c.name);
        FtReport r = feasibility_test(net, c.fs, b34);
        CHECK(r.flow_mw == doctest::Approx(c.f_ft));
        CHECK(r.rerouted_mw == doctest::Approx(c.rerouted));
        CHECK(r.margin_mw == doctest::Approx(-30));
        REQUIRE(r.critical_cut.has_value());
        const CutSet& k = *r.critical_cut;
        CHECK(k.branches == cut_ids);
        CHECK(k.side_c1 == std::vector<int>{4, 5});
        CHECK(k.transfer_mw == doctest::Approx(360));
        CHECK(k.capacity_post_outage_mw == doctest::Approx(330));
        CHECK(k.margin_mw == doctest::Approx(r.margin_mw));
        // report consistency against an independent transfer evaluation
        CHECK(cut_transfer(net, c.fs, k.side_c1) ==
              doctest::Approx(k.transfer_mw));
    }
}

TEST_CASE("outage of a zero-flow branch reroutes nothing") {
    Network net = five_bus();
    FlowState fig2 = build_flow_scripted(net, testing::direct_script());
    const int b45 = branch_between(net, 4, 5);
    REQUIRE(fig2.branch_flow_mw[b45] == 0);
    FtReport r = feasibility_test(net, fig2, b45);
    CHECK(r.flow_mw == 0);
    CHECK(r.rerouted_mw == 0);
    CHECK(r.margin_mw == 0);
    CHECK_FALSE(r.critical_cut.has_value());
}

TEST_CASE("bridge outage: the cut is the branch itself") {
    std::vector<Bus> buses = {{1, 50}, {2, 0}, {3, -50}};
    std::vector<Branch> branches = {{0, 1, 2, 100, {}}, {1, 2, 3, 100, {}}};
    Network net(buses, branches);
    FlowState fs = build_flow(net);
    FtReport r = feasibility_test(net, fs, 0);
    CHECK(r.flow_mw == doctest::Approx(50));
    CHECK(r.rerouted_mw == 0);
    CHECK(r.margin_mw == doctest::Approx(-50));
    REQUIRE(r.critical_cut.has_value());
    CHECK(r.critical_cut->branches == std::vector<int>{0});
    CHECK(r.critical_cut->side_c1 == std::vector<int>{1});
    CHECK(r.critical_cut->capacity_post_outage_mw == 0);
}

TEST_CASE("extract_cut refuses while an augmenting path remains") {
    Network net = five_bus();
    FlowState dc = solve_dc(net, 1);
    ResidualView rv = make_residual(net, dc, branch_between(net, 4, 5));
    CHECK_THROWS_AS(extract_cut(rv, net, dc), Error);
}

TEST_CASE("N-1 screen of the five-bus fixture") {
    Network net = five_bus();
    FlowState dc = solve_dc(net, 1);
    auto reports = screen_n_minus_1(net, dc, 1);
    REQUIRE(reports.size() == 7);

    // three outages saturate: 1-2 by 105, 2-3 by 45, 3-4 by 30; the rest
    // reroute fully
    CHECK(reports[0].outaged_branch == branch_between(net, 1, 2));
    CHECK(reports[0].margin_mw == doctest::Approx(-105));
    CHECK(reports[1].outaged_branch == branch_between(net, 2, 3));
    CHECK(reports[1].margin_mw == doctest::Approx(-45));
    CHECK(reports[2].outaged_branch == branch_between(net, 3, 4));
    CHECK(reports[2].margin_mw == doctest::Approx(-30));
    for (size_t i = 3; i < reports.size(); ++i)
        CHECK(reports[i].margin_mw == 0);
    // zero-margin tail is ordered by branch id
    CHECK(std::is_sorted(reports.begin() + 3, reports.end(),
                         [](const FtReport& a, const FtReport& b) {
                             return a.outaged_branch < b.outaged_branch;
                         }));

    // outages 1-2 and 2-3 saturate the enclosure of the bus-2 load pocket
    const auto pocket = ids(net, {{1, 2}, {2, 3}});
    CHECK(reports[0].critical_cut->branches == pocket);
    CHECK(reports[0].critical_cut->side_c1 == std::vector<int>{1, 3, 4, 5});
    CHECK(reports[1].critical_cut->branches == pocket);
    CHECK(reports[1].critical_cut->transfer_mw == doctest::Approx(300));

    SUBCASE("thread count does not change the outcome") {
        auto parallel = screen_n_minus_1(net, dc, 4);
        REQUIRE(parallel.size() == reports.size());
        for (size_t i = 0; i < reports.size(); ++i) {
            CHECK(parallel[i].outaged_branch == reports[i].outaged_branch);
            CHECK(parallel[i].margin_mw == reports[i].margin_mw);
        }
    }
}

TEST_CASE("brute-force margin oracle on the five-bus fixture") {
    Network net = five_bus();
    FlowState dc = solve_dc(net, 1);
    const int b34 = branch_between(net, 3, 4);

    SUBCASE("minimum margin and cut for outage 3-4") {
        auto [margin, cut] = brute_force_margin(net, dc, b34);
        CHECK(margin == doctest::Approx(-30));
        CHECK(cut.branches == ids(net, {{3, 4}, {3, 5}, {1, 5}}));
        CHECK(cut.side_c1 == std::vector<int>{4, 5});
    }

    SUBCASE("the four enclosing cuts evaluate to the golden margins") {
        std::vector<int> k1 = {4, 5};
        std::vector<int> k2 = {4};
        std::vector<int> k3 = {1, 4, 5};
        std::vector<int> k4 = {1, 2, 4, 5};
        CHECK(evaluate_cut(net, dc, b34, k1).margin_mw ==
              doctest::Approx(-30));
        CHECK(evaluate_cut(net, dc, b34, k2).margin_mw ==
              doctest::Approx(40));
        CHECK(evaluate_cut(net, dc, b34, k3).margin_mw ==
              doctest::Approx(0).epsilon(1e-9));
        CHECK(evaluate_cut(net, dc, b34, k4).margin_mw ==
              doctest::Approx(240));
    }

    SUBCASE("zero-flow outage has a non-negative minimum margin") {
        FlowState fig2 = build_flow_scripted(net, testing::direct_script());
        auto [margin, cut] = brute_force_margin(net, fig2,
                                                branch_between(net, 4, 5));
        CHECK(margin >= 0);
    }

    SUBCASE("refuses large networks") {
        Network big = testing::synthetic_grid(1);
        FlowState fs = build_flow(big);
        CHECK_THROWS_AS(brute_force_margin(big, fs, 0), ValidationError);
    }
}

TEST_CASE("feasibility test agrees with the oracle on every fixture branch") {
    Network net = five_bus();
    FlowState dc = solve_dc(net, 1);
    for (const Branch& b : net.branches()) {
        CAPTURE(b.from_bus);
            CAPTURE(b.to_bus);
        FtReport r = feasibility_test(net, dc, b.id);
        auto [margin, cut] = brute_force_margin(net, dc, b.id);
        CHECK(std::min(r.margin_mw, 0.0) ==
              doctest::Approx(std::min(margin, 0.0)).epsilon(1e-9));
    }
}

TEST_CASE("reducing the transfer by the reported margin clears the outage") {
    Network net = five_bus();
    FlowState dc = solve_dc(net, 1);
    const int b34 = branch_between(net, 3, 4);
    FtReport before = feasibility_test(net, dc, b34);
    REQUIRE(before.margin_mw == doctest::Approx(-30));

    // 30 MW less generation inside C1 = {4, 5}, 30 MW less load outside
    Network eased = apply_redispatch(
        net, std::vector<std::pair<int, double>>{{4, -30}, {2, +30}});
    FtReport after = feasibility_test(eased, solve_dc(eased, 1), b34);
    CHECK(after.margin_mw == doctest::Approx(0).epsilon(1e-9));
    CHECK_FALSE(after.critical_cut.has_value());
}

TEST_CASE("report JSON shape") {
    Network net = five_bus();
    FlowState dc = solve_dc(net, 1);

    SUBCASE("saturated outage") {
        FtReport r = feasibility_test(net, dc, branch_between(net, 3, 4));
        auto j = nlohmann::json::parse(to_json(net, r));
        CHECK(j["branch"]["id"] == branch_between(net, 3, 4));
        CHECK(j["branch"]["from"] == 3);
        CHECK(j["branch"]["to"] == 4);
        CHECK(j["flow_mw"].get<double>() == doctest::Approx(195));
        CHECK(j["rerouted_mw"].get<double>() == doctest::Approx(165));
        CHECK(j["margin_mw"].get<double>() == doctest::Approx(-30));
        CHECK(j["saturated"] == true);
        CHECK(j["critical_cut"]["side_c1"] == std::vector<int>{4, 5});
        CHECK(j["critical_cut"]["transfer_mw"].get<double>() ==
              doctest::Approx(360));
        CHECK(j["critical_cut"]["capacity_post_outage_mw"].get<double>() ==
              doctest::Approx(330));
    }
    SUBCASE("clean outage has a null cut") {
        FtReport r = feasibility_test(net, dc, branch_between(net, 4, 5));
        auto j = nlohmann::json::parse(to_json(net, r));
        CHECK(j["saturated"] == false);
        CHECK(j["critical_cut"].is_null());
    }
}
