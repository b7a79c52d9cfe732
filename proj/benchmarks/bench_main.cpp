#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "satcut/dc_oracle.hpp"
#include "satcut/ft_core.hpp"

using namespace satcut;

namespace {

const Network& case39() {
    static Network net = balance(load_case_file(testing::data_path("case39.m")));
    return net;
}

const FlowState& case39_flow() {
    static FlowState fs = build_flow(case39());
    return fs;
}

std::string case39_text() {
    std::ifstream in(testing::data_path("case39.m"));
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void BM_ParseMatpower39(benchmark::State& state) {
    std::string text = case39_text();
    for (auto _ : state) {
        Network net = parse_case(text, CaseFormat::MatpowerM);
        benchmark::DoNotOptimize(net.branch_count());
    }
}
BENCHMARK(BM_ParseMatpower39);

void BM_BuildFlow39(benchmark::State& state) {
    const Network& net = case39();
    for (auto _ : state) {
        FlowState fs = build_flow(net);
        benchmark::DoNotOptimize(fs.branch_flow_mw.data());
    }
}
BENCHMARK(BM_BuildFlow39);

void BM_SolveDc39(benchmark::State& state) {
    const Network& net = case39();
    for (auto _ : state) {
        FlowState fs = solve_dc(net, net.largest_generator_bus());
        benchmark::DoNotOptimize(fs.branch_flow_mw.data());
    }
}
BENCHMARK(BM_SolveDc39);

void BM_FeasibilityTest39(benchmark::State& state) {
    const Network& net = case39();
    const FlowState& fs = case39_flow();
    int outage = testing::branch_between(net, 6, 11);
    for (auto _ : state) {
        FtReport r = feasibility_test(net, fs, outage);
        benchmark::DoNotOptimize(r.margin_mw);
    }
}
BENCHMARK(BM_FeasibilityTest39);

void BM_DcContingency39(benchmark::State& state) {
    const Network& net = case39();
    int outage = testing::branch_between(net, 6, 11);
    int ref = net.largest_generator_bus();
    for (auto _ : state) {
        auto overloads = dc_contingency(net, outage, ref);
        benchmark::DoNotOptimize(overloads.size());
    }
}
BENCHMARK(BM_DcContingency39);

void BM_ScreenN1_39(benchmark::State& state) {
    const Network& net = case39();
    const FlowState& fs = case39_flow();
    for (auto _ : state) {
        auto reports = screen_n_minus_1(net, fs, 1);
        benchmark::DoNotOptimize(reports.size());
    }
}
BENCHMARK(BM_ScreenN1_39)->Unit(benchmark::kMillisecond);

// N-1 feasibility-test sweep on replicated grids of growing size
void BM_ScreenN1_Synthetic(benchmark::State& state) {
    Network net = testing::synthetic_grid(static_cast<int>(state.range(0)));
    FlowState fs = build_flow(net);
    for (auto _ : state) {
        auto reports = screen_n_minus_1(net, fs, 1);
        benchmark::DoNotOptimize(reports.size());
    }
    state.counters["buses"] = net.bus_count();
    state.counters["branches"] = net.branch_count();
}
BENCHMARK(BM_ScreenN1_Synthetic)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

// the matching DC baseline, one re-solve per outage
void BM_DcSweep_Synthetic(benchmark::State& state) {
    Network net = testing::synthetic_grid(static_cast<int>(state.range(0)));
    int ref = net.largest_generator_bus();
    for (auto _ : state) {
        int overloaded = 0;
        for (const Branch& b : net.branches()) {
            try {
                overloaded += !dc_contingency(net, b.id, ref).empty();
            } catch (const SolveError&) {
            }
        }
        benchmark::DoNotOptimize(overloaded);
    }
    state.counters["buses"] = net.bus_count();
    state.counters["branches"] = net.branch_count();
}
BENCHMARK(BM_DcSweep_Synthetic)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
