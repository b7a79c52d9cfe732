#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "satcut/errors.hpp"

namespace satcut {

/// Rating value meaning "no transfer limit" (MATPOWER RATE_A = 0).
inline constexpr double kUnlimitedMw = std::numeric_limits<double>::infinity();

/// Everything below this many MW counts as zero: balance mismatch,
/// conservation residue, spare branch capacity.
inline constexpr double kTolMw = 1e-6;

struct Bus {
    int id = 0;               // positive bus number from the case file
    double injection_mw = 0;  // generation positive, load negative
};

struct Branch {
    int id = 0;  // ordinal index within the network
    int from_bus = 0;
    int to_bus = 0;
    double rating_mw = kUnlimitedMw;
    std::optional<double> susceptance;  // per-unit, positive when present

    bool unlimited() const { return !std::isfinite(rating_mw); }
};

enum class CaseFormat { MatpowerM, NativeTsv };

enum class BalancePolicy { SlackAbsorb, ProportionalScale, Strict };

struct BalanceSpec {
    BalancePolicy policy = BalancePolicy::SlackAbsorb;
    // SlackAbsorb target; -1 selects the bus hosting the largest generator.
    int slack_bus = -1;
};

/// Immutable validated grid graph. Buses are kept sorted by id, branches in
/// file order. Parallel branches stay distinct. Construction rejects
/// duplicate bus ids, self-loops, dangling endpoints, negative ratings and
/// non-positive susceptances; connectivity and balance are the caller's
/// concern (see connected_components() and balance()).
class Network {
public:
    Network(std::vector<Bus> buses, std::vector<Branch> branches,
            int largest_gen_bus = -1);

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }
    int bus_count() const { return static_cast<int>(buses_.size()); }
    int branch_count() const { return static_cast<int>(branches_.size()); }

    bool has_bus(int bus_id) const { return index_.count(bus_id) != 0; }
    int bus_index(int bus_id) const;  // throws ValidationError when unknown
    const Bus& bus(int bus_id) const { return buses_[bus_index(bus_id)]; }
    const Branch& branch(int branch_id) const;

    /// One directed arc of the adjacency list of a bus (by bus index).
    /// Arcs are sorted by (neighbor bus id, branch id) so that breadth-first
    /// traversals are deterministic.
    struct Arc {
        int branch;       // branch id
        int other;        // bus index of the far endpoint
        bool forward;     // true when the near endpoint is branch.from_bus
    };
    std::span<const Arc> arcs(int bus_index) const;

    double injection_sum_mw() const;

    /// Bus hosting the largest generator: taken from the case's gen table
    /// when parsed, otherwise the bus with the largest positive injection.
    int largest_generator_bus() const;

    /// Same topology, new injections (indexed like buses()).
    Network with_injections(std::vector<double> injections_mw) const;

private:
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::unordered_map<int, int> index_;  // bus id -> index into buses_
    std::vector<Arc> arcs_;               // flattened adjacency
    std::vector<int> arc_begin_;          // per-bus offsets into arcs_
    int largest_gen_bus_ = -1;
};

/// Parse case text into an unbalanced, unvalidated Network.
Network parse_case(std::string_view text, CaseFormat format);

/// Read a case file; format inferred from the extension (.m -> MATPOWER)
/// unless given explicitly.
Network load_case_file(const std::string& path,
                       std::optional<CaseFormat> format = std::nullopt);

/// Zero the net injection mismatch. SlackAbsorb adds the mismatch to one
/// bus, ProportionalScale multiplies all positive injections by load/gen,
/// Strict rejects any mismatch above kTolMw.
Network balance(const Network& net, const BalanceSpec& spec = {});

/// Connected components as sorted lists of bus ids, ordered by smallest
/// member. The network is usable downstream only when exactly one exists.
std::vector<std::vector<int>> connected_components(const Network& net);

/// Serialize in the native TSV case format (re-parsing gives an identical
/// network).
std::string to_native_tsv(const Network& net);

}  // namespace satcut
