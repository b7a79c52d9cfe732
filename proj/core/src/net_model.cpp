#include "satcut/net_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace satcut {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_double(std::string_view tok, int line) {
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError("expected a number, got '" + std::string(tok) + "'", line);
    return v;
}

int parse_int(std::string_view tok, int line) {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
    return v;
}

struct Line {
    std::string_view text;
    int number;  // 1-based
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    int n = 1;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view ln = text.substr(start, end - start);
        if (!ln.empty() && ln.back() == '\r') ln.remove_suffix(1);
        lines.push_back({ln, n++});
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

// ---------------------------------------------------------------------------
// MATPOWER .m case files. Only baseMVA and the bus/gen/branch matrices are
// consumed; matrices end at "];" and rows may be separated by ';' or
// newlines. '%' starts a comment.
// ---------------------------------------------------------------------------

struct Matrix {
    std::vector<std::vector<double>> rows;
    std::vector<int> row_lines;
};

class MatpowerParser {
public:
    explicit MatpowerParser(std::string_view text) : lines_(split_lines(text)) {}

    Network parse() {
        for (size_t k = 0; k < lines_.size(); ++k) {
            std::string_view ln = strip_comment(lines_[k].text);
            if (is_blank(ln)) continue;
            if (auto pos = ln.find("mpc.baseMVA"); pos != std::string_view::npos) {
                parse_base_mva(ln, lines_[k].number);
            } else if (ln.find("mpc.bus") != std::string_view::npos &&
                       ln.find('[') != std::string_view::npos) {
                bus_ = read_matrix(k);
            } else if (ln.find("mpc.gen") != std::string_view::npos &&
                       ln.find("gencost") == std::string_view::npos &&
                       ln.find('[') != std::string_view::npos) {
                gen_ = read_matrix(k);
            } else if (ln.find("mpc.branch") != std::string_view::npos &&
                       ln.find('[') != std::string_view::npos) {
                branch_ = read_matrix(k);
            }
        }
        if (bus_.rows.empty()) throw ParseError("no mpc.bus matrix found");
        if (branch_.rows.empty()) throw ParseError("no mpc.branch matrix found");
        return assemble();
    }

private:
    static std::string_view strip_comment(std::string_view ln) {
        auto pos = ln.find('%');
        return pos == std::string_view::npos ? ln : ln.substr(0, pos);
    }

    void parse_base_mva(std::string_view ln, int line_no) {
        auto eq = ln.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("malformed baseMVA assignment", line_no);
        std::string_view rhs = ln.substr(eq + 1);
        if (auto sc = rhs.find(';'); sc != std::string_view::npos)
            rhs = rhs.substr(0, sc);
        auto toks = split_ws(rhs);
        if (toks.size() != 1)
            throw ParseError("malformed baseMVA assignment", line_no);
        base_mva_ = parse_double(toks[0], line_no);
        if (!(base_mva_ > 0))
            throw ParseError("baseMVA must be positive", line_no);
    }

    // Reads the matrix starting on lines_[k] (the "mpc.X = [" line). Leaves
    // k past the terminating "];".
    Matrix read_matrix(size_t& k) {
        Matrix m;
        std::string_view first = strip_comment(lines_[k].text);
        auto open = first.find('[');
        std::string pending(first.substr(open + 1));
        int pending_line = lines_[k].number;
        bool closed = false;
        while (true) {
            // rows inside the pending chunk are ';'-separated
            size_t start = 0;
            while (true) {
                auto sc = pending.find(';', start);
                std::string_view row;
                bool complete;
                if (sc == std::string::npos) {
                    row = std::string_view(pending).substr(start);
                    complete = false;
                } else {
                    row = std::string_view(pending).substr(start, sc - start);
                    complete = true;
                }
                if (auto close = row.find(']'); close != std::string_view::npos) {
                    row = row.substr(0, close);
                    closed = true;
                }
                if (!is_blank(row)) {
                    if (!complete && !closed)
                        throw ParseError("matrix row missing ';' terminator",
                                         pending_line);
                    auto toks = split_ws(row);
                    std::vector<double> vals;
                    vals.reserve(toks.size());
                    for (auto t : toks) vals.push_back(parse_double(t, pending_line));
                    m.rows.push_back(std::move(vals));
                    m.row_lines.push_back(pending_line);
                }
                if (closed || sc == std::string::npos) break;
                start = sc + 1;
            }
            if (closed) return m;
            if (++k >= lines_.size())
                throw ParseError("matrix not terminated by '];'", pending_line);
            pending = std::string(strip_comment(lines_[k].text));
            pending_line = lines_[k].number;
        }
    }

    Network assemble() {
        std::vector<Bus> buses;
        std::map<int, double> pg;  // bus id -> total generation
        for (size_t r = 0; r < bus_.rows.size(); ++r) {
            const auto& row = bus_.rows[r];
            if (row.size() < 3)
                throw ParseError("bus row needs at least 3 columns",
                                 bus_.row_lines[r]);
            int id = static_cast<int>(row[0]);
            double pd = row[2];
            buses.push_back({id, -pd});
        }
        for (size_t r = 0; r < gen_.rows.size(); ++r) {
            const auto& row = gen_.rows[r];
            if (row.size() < 2)
                throw ParseError("gen row needs at least 2 columns",
                                 gen_.row_lines[r]);
            pg[static_cast<int>(row[0])] += row[1];
        }
        std::unordered_map<int, size_t> at;
        for (size_t i = 0; i < buses.size(); ++i) {
            if (!at.emplace(buses[i].id, i).second)
                throw ParseError("duplicate bus id " + std::to_string(buses[i].id));
            if (auto it = pg.find(buses[i].id); it != pg.end())
                buses[i].injection_mw += it->second;
        }
        int largest_gen_bus = -1;
        double largest_pg = 0;
        for (const auto& [bus_id, p] : pg) {
            if (!at.count(bus_id))
                throw ParseError("gen references unknown bus " +
                                 std::to_string(bus_id));
            if (p > largest_pg) {
                largest_pg = p;
                largest_gen_bus = bus_id;
            }
        }

        std::vector<Branch> branches;
        for (size_t r = 0; r < branch_.rows.size(); ++r) {
            const auto& row = branch_.rows[r];
            if (row.size() < 6)
                throw ParseError("branch row needs at least 6 columns",
                                 branch_.row_lines[r]);
            Branch b;
            b.id = static_cast<int>(branches.size());
            b.from_bus = static_cast<int>(row[0]);
            b.to_bus = static_cast<int>(row[1]);
            double x = row[3];
            double rate_a = row[5];
            b.rating_mw = rate_a > 0 ? rate_a : kUnlimitedMw;
            if (x > 0) b.susceptance = 1.0 / x;
            if (!at.count(b.from_bus) || !at.count(b.to_bus))
                throw ParseError("branch " + std::to_string(b.from_bus) + "-" +
                                     std::to_string(b.to_bus) +
                                     " references an unknown bus",
                                 branch_.row_lines[r]);
            branches.push_back(b);
        }
        return Network(std::move(buses), std::move(branches), largest_gen_bus);
    }

    std::vector<Line> lines_;
    Matrix bus_, gen_, branch_;
    double base_mva_ = 100.0;
};

// ---------------------------------------------------------------------------
// Native TSV format:
//   #buses N branches M
//   bus <id> <injection_MW>
//   branch <from> <to> <rating_MW|inf> <susceptance|->
// Lines starting with '#' (other than the header) are comments.
// ---------------------------------------------------------------------------

Network parse_native_tsv(std::string_view text) {
    auto lines = split_lines(text);
    size_t k = 0;
    while (k < lines.size() && is_blank(lines[k].text)) ++k;
    if (k == lines.size()) throw ParseError("empty case file");

    auto header = split_ws(lines[k].text);
    if (header.size() != 4 || header[0] != "#buses" || header[2] != "branches")
        throw ParseError("expected header '#buses N branches M'",
                         lines[k].number);
    int n_buses = parse_int(header[1], lines[k].number);
    int n_branches = parse_int(header[3], lines[k].number);
    ++k;

    std::vector<Bus> buses;
    std::vector<Branch> branches;
    for (; k < lines.size(); ++k) {
        std::string_view ln = lines[k].text;
        int no = lines[k].number;
        if (is_blank(ln) || ln.front() == '#') continue;
        auto toks = split_ws(ln);
        if (toks[0] == "bus") {
            if (toks.size() != 3)
                throw ParseError("bus line needs 'bus <id> <injection_MW>'", no);
            buses.push_back({parse_int(toks[1], no), parse_double(toks[2], no)});
        } else if (toks[0] == "branch") {
            if (toks.size() != 5)
                throw ParseError(
                    "branch line needs 'branch <from> <to> <rating|inf> <b|->'",
                    no);
            Branch b;
            b.id = static_cast<int>(branches.size());
            b.from_bus = parse_int(toks[1], no);
            b.to_bus = parse_int(toks[2], no);
            b.rating_mw = toks[3] == "inf" ? kUnlimitedMw : parse_double(toks[3], no);
            if (toks[4] != "-") b.susceptance = parse_double(toks[4], no);
            branches.push_back(b);
        } else {
            throw ParseError("unknown record '" + std::string(toks[0]) + "'", no);
        }
    }
    if (static_cast<int>(buses.size()) != n_buses)
        throw ParseError("header declares " + std::to_string(n_buses) +
                         " buses, file has " + std::to_string(buses.size()));
    if (static_cast<int>(branches.size()) != n_branches)
        throw ParseError("header declares " + std::to_string(n_branches) +
                         " branches, file has " + std::to_string(branches.size()));
    return Network(std::move(buses), std::move(branches));
}

std::string format_mw(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

Network::Network(std::vector<Bus> buses, std::vector<Branch> branches,
                 int largest_gen_bus)
    : buses_(std::move(buses)),
      branches_(std::move(branches)),
      largest_gen_bus_(largest_gen_bus) {
    std::sort(buses_.begin(), buses_.end(),
              [](const Bus& a, const Bus& b) { return a.id < b.id; });
    index_.reserve(buses_.size());
    for (size_t i = 0; i < buses_.size(); ++i) {
        if (!index_.emplace(buses_[i].id, static_cast<int>(i)).second)
            throw ValidationError("duplicate bus id " +
                                  std::to_string(buses_[i].id));
        if (!std::isfinite(buses_[i].injection_mw))
            throw ValidationError("bus " + std::to_string(buses_[i].id) +
                                  " has a non-finite injection");
    }
    for (size_t i = 0; i < branches_.size(); ++i) {
        Branch& b = branches_[i];
        b.id = static_cast<int>(i);
        if (b.from_bus == b.to_bus)
            throw ValidationError("branch " + std::to_string(b.id) +
                                  " is a self-loop at bus " +
                                  std::to_string(b.from_bus));
        if (!index_.count(b.from_bus) || !index_.count(b.to_bus))
            throw ValidationError("branch " + std::to_string(b.from_bus) +
                                  "-" + std::to_string(b.to_bus) +
                                  " references an unknown bus");
        if (std::isfinite(b.rating_mw) && b.rating_mw < 0)
            throw ValidationError("branch " + std::to_string(b.id) +
                                  " has a negative rating");
        if (b.susceptance && !(*b.susceptance > 0))
            throw ValidationError("branch " + std::to_string(b.id) +
                                  " has a non-positive susceptance");
    }

    // flattened adjacency, arcs sorted by (neighbor id, branch id)
    std::vector<std::vector<Arc>> adj(buses_.size());
    for (const Branch& b : branches_) {
        int fi = index_.at(b.from_bus);
        int ti = index_.at(b.to_bus);
        adj[fi].push_back({b.id, ti, true});
        adj[ti].push_back({b.id, fi, false});
    }
    arc_begin_.assign(buses_.size() + 1, 0);
    for (size_t i = 0; i < adj.size(); ++i) {
        std::sort(adj[i].begin(), adj[i].end(), [&](const Arc& a, const Arc& b) {
            int ida = buses_[a.other].id, idb = buses_[b.other].id;
            return ida != idb ? ida < idb : a.branch < b.branch;
        });
        arc_begin_[i + 1] = arc_begin_[i] + static_cast<int>(adj[i].size());
    }
    arcs_.reserve(arc_begin_.back());
    for (auto& v : adj) arcs_.insert(arcs_.end(), v.begin(), v.end());
}

int Network::bus_index(int bus_id) const {
    auto it = index_.find(bus_id);
    if (it == index_.end())
        throw ValidationError("unknown bus id " + std::to_string(bus_id));
    return it->second;
}

const Branch& Network::branch(int branch_id) const {
    if (branch_id < 0 || branch_id >= branch_count())
        throw ValidationError("unknown branch id " + std::to_string(branch_id));
    return branches_[branch_id];
}

std::span<const Network::Arc> Network::arcs(int bus_index) const {
    return {arcs_.data() + arc_begin_[bus_index],
            arcs_.data() + arc_begin_[bus_index + 1]};
}

double Network::injection_sum_mw() const {
    double s = 0;
    for (const Bus& b : buses_) s += b.injection_mw;
    return s;
}

int Network::largest_generator_bus() const {
    if (largest_gen_bus_ >= 0) return largest_gen_bus_;
    int best = -1;
    double best_inj = 0;
    for (const Bus& b : buses_) {
        if (b.injection_mw > best_inj) {
            best_inj = b.injection_mw;
            best = b.id;
        }
    }
    return best;
}

Network Network::with_injections(std::vector<double> injections_mw) const {
    if (injections_mw.size() != buses_.size())
        throw ValidationError("injection vector size mismatch");
    std::vector<Bus> buses = buses_;
    for (size_t i = 0; i < buses.size(); ++i)
        buses[i].injection_mw = injections_mw[i];
    return Network(std::move(buses), branches_, largest_gen_bus_);
}

// ---------------------------------------------------------------------------
// free functions
// ---------------------------------------------------------------------------

Network parse_case(std::string_view text, CaseFormat format) {
    switch (format) {
        case CaseFormat::MatpowerM:
            return MatpowerParser(text).parse();
        case CaseFormat::NativeTsv:
            return parse_native_tsv(text);
    }
    throw Error("unknown case format");
}

Network load_case_file(const std::string& path,
                       std::optional<CaseFormat> format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open case file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    CaseFormat f = format.value_or(path.size() > 2 &&
                                           path.compare(path.size() - 2, 2, ".m") == 0
                                       ? CaseFormat::MatpowerM
                                       : CaseFormat::NativeTsv);
    return parse_case(buf.str(), f);
}

Network balance(const Network& net, const BalanceSpec& spec) {
    double mismatch = net.injection_sum_mw();
    if (std::abs(mismatch) <= kTolMw) return net;  // nothing to absorb

    std::vector<double> inj;
    inj.reserve(net.bus_count());
    for (const Bus& b : net.buses()) inj.push_back(b.injection_mw);

    switch (spec.policy) {
        case BalancePolicy::Strict:
            throw BalanceError("injections do not balance: mismatch " +
                               format_mw(mismatch) + " MW");
        case BalancePolicy::SlackAbsorb: {
            int slack = spec.slack_bus >= 0 ? spec.slack_bus
                                            : net.largest_generator_bus();
            if (slack < 0)
                throw BalanceError("no generator available as slack bus");
            if (!net.has_bus(slack))
                throw BalanceError("slack bus " + std::to_string(slack) +
                                   " is not in the network");
            inj[net.bus_index(slack)] -= mismatch;
            return net.with_injections(std::move(inj));
        }
        case BalancePolicy::ProportionalScale: {
            double gen = 0, load = 0;
            for (double v : inj) (v > 0 ? gen : load) += v;
            load = -load;
            if (gen <= 0 && load > kTolMw)
                throw BalanceError("cannot scale: no generation to serve " +
                                   format_mw(load) + " MW of load");
            if (gen > 0) {
                double scale = load / gen;
                for (double& v : inj)
                    if (v > 0) v *= scale;
            }
            return net.with_injections(std::move(inj));
        }
    }
    throw Error("unknown balance policy");
}

std::vector<std::vector<int>> connected_components(const Network& net) {
    const int n = net.bus_count();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> out;
    std::vector<int> stack;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        int c = static_cast<int>(out.size());
        out.emplace_back();
        comp[s] = c;
        stack.assign(1, s);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            out[c].push_back(net.buses()[u].id);
            for (const auto& arc : net.arcs(u)) {
                if (comp[arc.other] < 0) {
                    comp[arc.other] = c;
                    stack.push_back(arc.other);
                }
            }
        }
        std::sort(out[c].begin(), out[c].end());
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

std::string to_native_tsv(const Network& net) {
    std::ostringstream os;
    os << "#buses " << net.bus_count() << " branches " << net.branch_count()
       << "\n";
    for (const Bus& b : net.buses())
        os << "bus " << b.id << " " << format_mw(b.injection_mw) << "\n";
    for (const Branch& b : net.branches()) {
        os << "branch " << b.from_bus << " " << b.to_bus << " ";
        if (b.unlimited())
            os << "inf";
        else
            os << format_mw(b.rating_mw);
        os << " ";
        if (b.susceptance)
            os << format_mw(*b.susceptance);
        else
            os << "-";
        os << "\n";
    }
    return os.str();
}

}  // namespace satcut
