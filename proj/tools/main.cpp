// satcut: screen transmission outages for saturated cut-sets.
//
// Commands
//   validate  parse a case, report connectivity and balance
//   flow      build a graph-based flow solution and print it as TSV
//   ft        feasibility test of one outage
//   screen    feasibility test of every branch (N-1)
//   dc        DC contingency overloads (one outage or a full sweep)
//   bench     wall-clock N-1 comparison: feasibility test vs DC re-solve
//
// Exit codes: 0 ok, 1 usage, 2 parse/validation, 3 infeasible/island.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "satcut/dc_oracle.hpp"
#include "satcut/errors.hpp"
#include "satcut/flow_builder.hpp"
#include "satcut/ft_core.hpp"
#include "satcut/net_model.hpp"

using namespace satcut;
using json = nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::string command;
    std::string case_path;
    std::string format = "auto";      // matpower | native | auto
    std::string balance_arg = "slack";  // slack[:<bus>] | scale | strict
    std::string outage;               // FROM-TO[:k]
    std::string output = "json";      // json | table
    std::uint64_t seed = 0;
    bool seeded = false;
    int threads = 0;                  // 0 = hardware parallelism
};

int usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return 1;
}

std::optional<CaseFormat> parse_format(const RunConfig& cfg) {
    if (cfg.format == "matpower") return CaseFormat::MatpowerM;
    if (cfg.format == "native") return CaseFormat::NativeTsv;
    return std::nullopt;  // infer from the extension
}

BalanceSpec parse_balance(const RunConfig& cfg) {
    if (cfg.balance_arg == "scale")
        return {BalancePolicy::ProportionalScale, -1};
    if (cfg.balance_arg == "strict") return {BalancePolicy::Strict, -1};
    if (cfg.balance_arg == "slack") return {BalancePolicy::SlackAbsorb, -1};
    if (cfg.balance_arg.rfind("slack:", 0) == 0) {
        try {
            return {BalancePolicy::SlackAbsorb,
                    std::stoi(cfg.balance_arg.substr(6))};
        } catch (const std::exception&) {
        }
    }
    throw CLI::ValidationError("--balance",
                               "expected slack[:<bus>], scale or strict");
}

// FROM-TO[:k], k 1-based among parallel branches (default: first)
int resolve_outage(const Network& net, const std::string& arg) {
    auto dash = arg.find('-');
    if (dash == std::string::npos || dash == 0)
        throw ValidationError("--outage expects FROM-TO[:k]");
    auto colon = arg.find(':', dash);
    int from, to, k;
    try {
        from = std::stoi(arg.substr(0, dash));
        to = std::stoi(arg.substr(dash + 1, colon == std::string::npos
                                                ? std::string::npos
                                                : colon - dash - 1));
        k = colon == std::string::npos ? 1 : std::stoi(arg.substr(colon + 1));
    } catch (const std::exception&) {
        throw ValidationError("--outage expects FROM-TO[:k]");
    }
    if (k < 1) throw ValidationError("--outage index k must be >= 1");
    int seen = 0;
    for (const Branch& b : net.branches()) {
        if ((b.from_bus == from && b.to_bus == to) ||
            (b.from_bus == to && b.to_bus == from)) {
            if (++seen == k) return b.id;
        }
    }
    throw ValidationError("no branch " + arg + " in the case");
}

RoutingPolicy routing_policy(const RunConfig& cfg) {
    if (cfg.seeded) return {PairingOrder::Random, cfg.seed};
    return {PairingOrder::AscendingBusId, 0};
}

std::string branch_label(const Network& net, int branch_id) {
    const Branch& b = net.branch(branch_id);
    std::string s = std::to_string(b.from_bus) + "-" + std::to_string(b.to_bus);
    int k = 0;
    for (const Branch& other : net.branches()) {
        if (other.id == branch_id) break;
        if ((other.from_bus == b.from_bus && other.to_bus == b.to_bus) ||
            (other.from_bus == b.to_bus && other.to_bus == b.from_bus))
            ++k;
    }
    if (k > 0) s += ":" + std::to_string(k + 1);
    return s;
}

int reference_bus(const Network& net, const BalanceSpec& spec) {
    if (spec.policy == BalancePolicy::SlackAbsorb && spec.slack_bus >= 0)
        return spec.slack_bus;
    return net.largest_generator_bus();
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0)
        threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < count; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

int cmd_validate(const RunConfig& cfg, const Network& raw) {
    auto comps = connected_components(raw);
    double mismatch = raw.injection_sum_mw();

    std::ostringstream report;
    report << "buses " << raw.bus_count() << ", branches "
           << raw.branch_count() << "\n";
    report << "components " << comps.size() << "\n";
    report << "injection mismatch " << mismatch << " MW\n";

    if (comps.size() != 1) {
        std::cout << report.str();
        std::cerr << "error: network splits into " << comps.size()
                  << " components\n";
        return 3;
    }
    try {
        balance(raw, parse_balance(cfg));
    } catch (const BalanceError& e) {
        std::cout << report.str();
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    report << "balance ok (policy " << cfg.balance_arg << ")\n";
    report << "connected\n";
    std::cout << report.str();
    return 0;
}

int cmd_flow(const RunConfig& cfg, const Network& net) {
    FlowState fs = build_flow(net, routing_policy(cfg));
    std::cout << to_flow_tsv(net, fs);
    return 0;
}

void print_ft_table(const Network& net, const FtReport& r, std::ostream& os) {
    os << branch_label(net, r.outaged_branch) << "  flow "
       << r.flow_mw << "  rerouted " << r.rerouted_mw << "  margin "
       << r.margin_mw;
    if (r.critical_cut) {
        os << "  cut {";
        for (size_t i = 0; i < r.critical_cut->branches.size(); ++i) {
            if (i) os << ", ";
            os << branch_label(net, r.critical_cut->branches[i]);
        }
        os << "}";
        if (r.critical_cut->branches.size() == 1) os << " (islanding)";
    }
    os << "\n";
}

int cmd_ft(const RunConfig& cfg, const Network& net) {
    int outage = resolve_outage(net, cfg.outage);
    FlowState fs = build_flow(net, routing_policy(cfg));
    FtReport r = feasibility_test(net, fs, outage);
    if (cfg.output == "json")
        std::cout << to_json(net, r) << "\n";
    else
        print_ft_table(net, r, std::cout);
    return 0;
}

void require_susceptances(const Network& net) {
    for (const Branch& b : net.branches())
        if (!b.susceptance)
            throw SolveError("branch " + std::to_string(b.from_bus) + "-" +
                             std::to_string(b.to_bus) +
                             " has no susceptance; DC analysis "
                             "needs one on every branch");
}

int cmd_screen(const RunConfig& cfg, const Network& net) {
    FlowState fs = build_flow(net, routing_policy(cfg));
    auto reports = screen_n_minus_1(net, fs, cfg.threads);
    if (cfg.output == "json") {
        std::cout << "[";
        for (size_t i = 0; i < reports.size(); ++i) {
            if (i) std::cout << ",";
            std::cout << "\n" << to_json(net, reports[i]);
        }
        std::cout << "\n]\n";
    } else {
        int saturated = 0;
        for (const auto& r : reports)
            if (r.saturated()) ++saturated;
        std::cout << "outages " << reports.size() << ", saturated "
                  << saturated << "\n";
        for (const auto& r : reports) print_ft_table(net, r, std::cout);
    }
    return 0;
}

int cmd_dc(const RunConfig& cfg, const Network& net, const BalanceSpec& spec) {
    require_susceptances(net);
    int ref = reference_bus(net, spec);
    if (!cfg.outage.empty()) {
        int outage = resolve_outage(net, cfg.outage);
        auto overloads = dc_contingency(net, outage, ref);
        if (cfg.output == "json") {
            std::cout << to_json(net, outage, overloads) << "\n";
        } else {
            std::cout << branch_label(net, outage) << "  overloads "
                      << overloads.size() << "\n";
            for (const auto& o : overloads)
                std::cout << "  " << branch_label(net, o.branch) << "  flow "
                          << o.flow_mw << "  rating " << o.rating_mw
                          << "  excess " << o.excess_mw << "\n";
        }
        return 0;
    }

    // full N-1 sweep; islanding outages are reported, not solved
    const int m = net.branch_count();
    std::vector<std::string> rows(m);
    std::vector<char> islanded(m, 0);
    parallel_for(m, cfg.threads, [&](int b) {
        try {
            auto overloads = dc_contingency(net, b, ref);
            if (cfg.output == "json") {
                rows[b] = to_json(net, b, overloads);
            } else if (!overloads.empty()) {
                std::ostringstream os;
                os << branch_label(net, b) << "  overloads "
                   << overloads.size() << "\n";
                rows[b] = os.str();
            }
        } catch (const SolveError&) {
            islanded[b] = 1;
            if (cfg.output == "json") {
                json j;
                j["outage"] = b;
                j["islanding"] = true;
                rows[b] = j.dump();
            } else {
                rows[b] = branch_label(net, b) + "  islanding\n";
            }
        }
    });
    if (cfg.output == "json") {
        std::cout << "[";
        for (int b = 0; b < m; ++b) {
            if (b) std::cout << ",";
            std::cout << "\n" << rows[b];
        }
        std::cout << "\n]\n";
    } else {
        for (const auto& row : rows) std::cout << row;
    }
    return 0;
}

int cmd_bench(const RunConfig& cfg, const Network& net,
              const BalanceSpec& spec) {
    require_susceptances(net);
    int ref = reference_bus(net, spec);
    const int m = net.branch_count();

    auto t0 = std::chrono::steady_clock::now();
    FlowState fs = build_flow(net, routing_policy(cfg));
    double build_ms = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    auto reports = screen_n_minus_1(net, fs, cfg.threads);
    double ft_ms = ms_since(t0);

    int islanding = 0;
    t0 = std::chrono::steady_clock::now();
    std::vector<char> islanded(m, 0);
    parallel_for(m, cfg.threads, [&](int b) {
        try {
            dc_contingency(net, b, ref);
        } catch (const SolveError&) {
            islanded[b] = 1;
        }
    });
    double dc_ms = ms_since(t0);
    for (char c : islanded) islanding += c;

    int saturated = 0;
    for (const auto& r : reports)
        if (r.saturated()) ++saturated;

    double speedup = ft_ms > 0 ? dc_ms / ft_ms : 0;
    speedup = std::round(speedup * 100) / 100;

    if (cfg.output == "json") {
        json j;
        j["branches"] = m;
        j["threads"] = cfg.threads;
        j["flow_build_ms"] = build_ms;
        j["ft_sweep_ms"] = ft_ms;
        j["dc_sweep_ms"] = dc_ms;
        j["speedup"] = speedup;
        j["saturated_outages"] = saturated;
        j["islanding_outages"] = islanding;
        std::cout << j.dump() << "\n";
    } else {
        std::printf("N-1 over %d branches (threads %d)\n", m, cfg.threads);
        std::printf("  flow build      %12.3f ms\n", build_ms);
        std::printf("  feasibility test%12.3f ms\n", ft_ms);
        std::printf("  dc contingency  %12.3f ms\n", dc_ms);
        std::printf("  speedup         %12.2f x\n", speedup);
        std::printf("  saturated %d, islanding %d\n", saturated, islanding);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"saturated cut-set screening for transmission outages"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_common = [&](CLI::App* sub, bool with_outage) {
        sub->add_option("--case", cfg.case_path, "case file")->required();
        sub->add_option("--format", cfg.format, "matpower|native")
            ->check(CLI::IsMember({"matpower", "native", "auto"}));
        sub->add_option("--balance", cfg.balance_arg,
                        "slack[:<bus>] | scale | strict");
        sub->add_option("--output", cfg.output, "json|table")
            ->check(CLI::IsMember({"json", "table"}));
        sub->add_option("--seed", cfg.seed, "random pairing seed");
        sub->add_option("--threads", cfg.threads,
                        "thread count (0 = hardware)");
        if (with_outage)
            sub->add_option("--outage", cfg.outage, "branch FROM-TO[:k]");
    };

    CLI::App* validate = app.add_subcommand("validate", "check a case file");
    CLI::App* flow = app.add_subcommand("flow", "print a valid flow");
    CLI::App* ft = app.add_subcommand("ft", "feasibility-test one outage");
    CLI::App* screen = app.add_subcommand("screen", "N-1 feasibility test");
    CLI::App* dc = app.add_subcommand("dc", "DC contingency overloads");
    CLI::App* bench =
        app.add_subcommand("bench", "time N-1 feasibility test vs DC");
    add_common(validate, false);
    add_common(flow, false);
    add_common(ft, true);
    add_common(screen, false);
    add_common(dc, true);
    add_common(bench, false);
    ft->get_option("--outage")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);  // prints the diagnostic (or the help text)
        return rc == 0 ? 0 : 1;
    }

    for (auto* sub : {validate, flow, ft, screen, dc, bench}) {
        if (sub->parsed()) {
            cfg.command = sub->get_name();
            cfg.seeded = sub->count("--seed") > 0;
        }
    }

    try {
        Network raw = load_case_file(cfg.case_path, parse_format(cfg));

        if (cfg.command == "validate") return cmd_validate(cfg, raw);

        BalanceSpec spec = parse_balance(cfg);
        Network net = balance(raw, spec);
        if (connected_components(net).size() != 1) {
            std::cerr << "error: network is not connected\n";
            return 3;
        }

        if (cfg.command == "flow") return cmd_flow(cfg, net);
        if (cfg.command == "ft") return cmd_ft(cfg, net);
        if (cfg.command == "screen") return cmd_screen(cfg, net);
        if (cfg.command == "dc") return cmd_dc(cfg, net, spec);
        if (cfg.command == "bench") return cmd_bench(cfg, net, spec);
        return usage_error("unknown command");
    } catch (const ParseError& e) {
        std::cerr << "error: " << cfg.case_path << ": " << e.what() << "\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        return usage_error(e.what());
    } catch (const ValidationError& e) {
        // bad ids inside an otherwise well-formed case: parse-class failure
        // unless it came from argument resolution
        std::string what = e.what();
        if (what.find("--outage") != std::string::npos ||
            what.find("no branch") != std::string::npos)
            return usage_error(what);
        std::cerr << "error: " << cfg.case_path << ": " << what << "\n";
        return 2;
    } catch (const BalanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const FlowError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const SolveError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
