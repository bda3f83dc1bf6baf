#include "signet/graph.hpp"
#include "signet/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

namespace signet {

namespace {

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

bool parse_i64(std::string_view tok, std::int64_t& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    if (tok.empty()) return false;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

// Splits on spaces/tabs; returns false if the line has a different number of
// tokens than `want`.
bool split_tokens(std::string_view line, std::span<std::string_view> want) {
    std::size_t filled = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        if (pos >= line.size()) break;
        std::size_t end = pos;
        while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
        if (filled == want.size()) return false;
        want[filled++] = line.substr(pos, end - pos);
        pos = end;
    }
    return filled == want.size();
}

std::uint64_t pair_key(NodeId a, NodeId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

WeightParts decompose_weight(std::int64_t w) {
    if (w == 0) throw std::invalid_argument("edge weight must be nonzero");
    return {static_cast<std::uint32_t>(w < 0 ? -w : w), w < 0 ? -1 : +1};
}

SignedGraph SignedGraph::from_edges(std::size_t node_count, bool directed,
                                    std::vector<Edge> edges,
                                    std::vector<std::int64_t> external_ids) {
    if (!external_ids.empty()) {
        if (external_ids.size() != node_count)
            throw std::invalid_argument("external id map size does not match node count");
        if (std::adjacent_find(external_ids.begin(), external_ids.end(),
                               [](auto a, auto b) { return a >= b; }) != external_ids.end())
            throw std::invalid_argument("external ids must be strictly increasing");
    }

    std::unordered_map<std::uint64_t, std::int32_t> seen;
    seen.reserve(edges.size() * 2);
    for (const Edge& e : edges) {
        if (e.src >= node_count || e.dst >= node_count)
            throw std::invalid_argument("edge endpoint out of range");
        if (e.weight == 0) throw std::invalid_argument("edge weight must be nonzero");
        if (e.src == e.dst)
            throw std::invalid_argument("self-loop at node " + std::to_string(e.src));
        std::uint64_t key = directed ? pair_key(e.src, e.dst)
                                     : pair_key(std::min(e.src, e.dst), std::max(e.src, e.dst));
        auto [it, inserted] = seen.emplace(key, e.weight);
        if (!inserted) {
            std::string name = std::to_string(e.src) + (directed ? "->" : "-") +
                               std::to_string(e.dst);
            if (!directed && it->second != e.weight)
                throw std::invalid_argument("inconsistent duplicate of undirected edge " + name);
            throw std::invalid_argument("duplicate edge " + name);
        }
    }

    SignedGraph g;
    g.node_count_ = node_count;
    g.directed_ = directed;
    g.edges_ = std::move(edges);
    g.external_ids_ = std::move(external_ids);
    g.positive_edges_ =
        static_cast<std::size_t>(std::count_if(g.edges_.begin(), g.edges_.end(),
                                               [](const Edge& e) { return e.weight > 0; }));

    auto build_rows = [&](bool incoming, std::vector<std::size_t>& offsets,
                          std::vector<NodeId>& targets, std::vector<std::int32_t>& weights) {
        offsets.assign(node_count + 1, 0);
        for (const Edge& e : g.edges_) {
            offsets[(incoming ? e.dst : e.src) + 1]++;
            if (!directed) offsets[e.dst + 1]++;
        }
        std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
        targets.resize(offsets.back());
        weights.resize(offsets.back());
        std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
        for (const Edge& e : g.edges_) {
            NodeId row = incoming ? e.dst : e.src;
            NodeId col = incoming ? e.src : e.dst;
            targets[cursor[row]] = col;
            weights[cursor[row]++] = e.weight;
            if (!directed) {
                targets[cursor[e.dst]] = e.src;
                weights[cursor[e.dst]++] = e.weight;
            }
        }
        std::vector<std::pair<NodeId, std::int32_t>> row;
        for (std::size_t v = 0; v < node_count; ++v) {
            std::size_t lo = offsets[v], hi = offsets[v + 1];
            row.clear();
            for (std::size_t k = lo; k < hi; ++k) row.emplace_back(targets[k], weights[k]);
            std::sort(row.begin(), row.end());
            for (std::size_t k = lo; k < hi; ++k) {
                targets[k] = row[k - lo].first;
                weights[k] = row[k - lo].second;
            }
        }
    };

    build_rows(false, g.out_offsets_, g.out_targets_, g.out_edge_weights_);
    if (directed) build_rows(true, g.in_offsets_, g.in_targets_, g.in_edge_weights_);
    else {
        g.in_offsets_.assign(node_count + 1, 0);
    }
    return g;
}

std::span<const NodeId> SignedGraph::out_neighbors(NodeId v) const {
    return {out_targets_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
}

std::span<const std::int32_t> SignedGraph::out_weights(NodeId v) const {
    return {out_edge_weights_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
}

std::size_t SignedGraph::out_degree(NodeId v) const {
    return out_offsets_[v + 1] - out_offsets_[v];
}

std::span<const NodeId> SignedGraph::in_neighbors(NodeId v) const {
    if (!directed_) return {};
    return {in_targets_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
}

std::span<const std::int32_t> SignedGraph::in_weights(NodeId v) const {
    if (!directed_) return {};
    return {in_edge_weights_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
}

bool SignedGraph::has_out_edge(NodeId src, NodeId dst) const {
    auto row = out_neighbors(src);
    return std::binary_search(row.begin(), row.end(), dst);
}

std::int32_t SignedGraph::out_edge_weight(NodeId src, NodeId dst) const {
    auto row = out_neighbors(src);
    auto it = std::lower_bound(row.begin(), row.end(), dst);
    if (it == row.end() || *it != dst)
        throw std::out_of_range("no edge " + std::to_string(src) + "->" + std::to_string(dst));
    return out_weights(src)[static_cast<std::size_t>(it - row.begin())];
}

NodeId SignedGraph::internal_id(std::int64_t external) const {
    if (external_ids_.empty()) {
        if (external < 0 || static_cast<std::uint64_t>(external) >= node_count_)
            throw std::out_of_range("unknown node id " + std::to_string(external));
        return static_cast<NodeId>(external);
    }
    auto it = std::lower_bound(external_ids_.begin(), external_ids_.end(), external);
    if (it == external_ids_.end() || *it != external)
        throw std::out_of_range("unknown node id " + std::to_string(external));
    return static_cast<NodeId>(it - external_ids_.begin());
}

SignedGraph load_edge_list(std::istream& in, bool directed) {
    struct Row {
        std::int64_t src, dst, weight;
    };
    std::vector<Row> rows;
    // raw (src,dst) -> first line number, for duplicate reporting
    std::unordered_map<std::uint64_t, std::size_t> first_line;
    std::unordered_map<std::uint64_t, std::int64_t> first_weight;

    auto raw_key = [&](std::int64_t a, std::int64_t b) {
        if (!directed && a > b) std::swap(a, b);
        // ids are validated < 2^32 before keying
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv = line;
        std::size_t start = sv.find_first_not_of(" \t");
        if (start == std::string_view::npos || sv[start] == '#') continue;

        std::string_view tok[3];
        if (!split_tokens(sv, tok)) fail_line(line_no, "expected 'src dst weight'");
        Row r{};
        if (!parse_i64(tok[0], r.src) || !parse_i64(tok[1], r.dst) ||
            !parse_i64(tok[2], r.weight))
            fail_line(line_no, "expected 'src dst weight'");
        if (r.src < 0 || r.dst < 0) fail_line(line_no, "negative node id");
        if (r.src >= (std::int64_t{1} << 32) || r.dst >= (std::int64_t{1} << 32))
            fail_line(line_no, "node id too large");
        if (r.weight == 0) fail_line(line_no, "zero weight");
        if (r.weight > std::numeric_limits<std::int32_t>::max() ||
            r.weight < -std::numeric_limits<std::int32_t>::max())
            fail_line(line_no, "weight out of range");
        if (r.src == r.dst) fail_line(line_no, "self-loop at node " + std::to_string(r.src));

        std::uint64_t key = raw_key(r.src, r.dst);
        auto [it, inserted] = first_line.emplace(key, line_no);
        if (!inserted) {
            std::string name = std::to_string(r.src) + (directed ? "->" : "-") +
                               std::to_string(r.dst) + " (first seen at line " +
                               std::to_string(it->second) + ")";
            if (!directed && first_weight[key] != r.weight)
                fail_line(line_no, "inconsistent duplicate of undirected edge " + name);
            fail_line(line_no, "duplicate edge " + name);
        }
        first_weight.emplace(key, r.weight);
        rows.push_back(r);
    }
    if (in.bad()) throw std::runtime_error("I/O error while reading edge list");

    std::vector<std::int64_t> ids;
    ids.reserve(rows.size() * 2);
    for (const Row& r : rows) {
        ids.push_back(r.src);
        ids.push_back(r.dst);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    bool dense = ids.empty() || (ids.front() == 0 &&
                                 ids.back() == static_cast<std::int64_t>(ids.size()) - 1);
    std::size_t node_count = ids.empty() ? 0 : static_cast<std::size_t>(ids.back()) + 1;
    std::vector<std::int64_t> external;
    if (!dense) {
        node_count = ids.size();
        external = ids;
    }

    auto to_internal = [&](std::int64_t id) {
        if (dense) return static_cast<NodeId>(id);
        auto it = std::lower_bound(ids.begin(), ids.end(), id);
        return static_cast<NodeId>(it - ids.begin());
    };

    std::vector<Edge> edges;
    edges.reserve(rows.size());
    for (const Row& r : rows)
        edges.push_back({to_internal(r.src), to_internal(r.dst),
                         static_cast<std::int32_t>(r.weight)});
    return SignedGraph::from_edges(node_count, directed, std::move(edges), std::move(external));
}

SignedGraph load_edge_list_file(const std::string& path, bool directed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_edge_list(in, directed);
}

void save_edge_list(const SignedGraph& g, std::ostream& out) {
    for (const Edge& e : g.edges())
        out << g.external_id(e.src) << ' ' << g.external_id(e.dst) << ' ' << e.weight << '\n';
    if (!out) throw std::runtime_error("I/O error while writing edge list");
}

void save_edge_list_file(const SignedGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    save_edge_list(g, out);
}

NodeLabels load_labels(std::istream& in, const SignedGraph& g) {
    NodeLabels labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv = line;
        std::size_t start = sv.find_first_not_of(" \t");
        if (start == std::string_view::npos || sv[start] == '#') continue;

        std::string_view tok[2];
        std::int64_t node = 0, label = 0;
        if (!split_tokens(sv, tok) || !parse_i64(tok[0], node) || !parse_i64(tok[1], label))
            fail_line(line_no, "expected 'node label'");
        NodeId v = 0;
        try {
            v = g.internal_id(node);
        } catch (const std::out_of_range&) {
            fail_line(line_no, "unknown node id " + std::to_string(node));
        }
        if (!labels.emplace(v, static_cast<int>(label)).second)
            fail_line(line_no, "duplicate label for node " + std::to_string(node));
    }
    if (in.bad()) throw std::runtime_error("I/O error while reading labels");
    return labels;
}

NodeLabels load_labels_file(const std::string& path, const SignedGraph& g) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_labels(in, g);
}

SignedGraph generate_er_signed(std::size_t n, double avg_degree, double negative_fraction,
                               std::uint64_t seed, bool directed) {
    if (n < 2) throw std::invalid_argument("generator needs at least 2 nodes");
    if (!(avg_degree >= 0.0) || avg_degree > static_cast<double>(n - 1))
        throw std::invalid_argument("average degree must be in [0, n-1]");
    if (!(negative_fraction >= 0.0 && negative_fraction <= 1.0))
        throw std::invalid_argument("negative fraction must be in [0, 1]");

    const double p = avg_degree / static_cast<double>(n - 1);
    auto topo_rng = make_rng(seed, "er-topology");
    auto sign_rng = make_rng(seed, "er-signs");
    auto orient_rng = make_rng(seed, "er-orient");

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(avg_degree * static_cast<double>(n) / 2.0 * 1.1) + 16);
    auto emit = [&](NodeId a, NodeId b) {
        std::int32_t w = uniform01(sign_rng) < negative_fraction ? -1 : 1;
        if (directed && coin_flip(orient_rng)) std::swap(a, b);
        edges.push_back({a, b, w});
    };

    if (p >= 1.0) {
        for (NodeId v = 1; v < n; ++v)
            for (NodeId w = 0; w < v; ++w) emit(v, w);
    } else if (p > 0.0) {
        // Geometric skipping over the n(n-1)/2 candidate pairs: visits each
        // pair independently with probability p in O(edges) draws.
        const double log_q = std::log1p(-p);
        std::int64_t v = 1, w = -1;
        const auto nn = static_cast<std::int64_t>(n);
        while (v < nn) {
            double r = uniform01(topo_rng);
            w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
            while (w >= v && v < nn) {
                w -= v;
                ++v;
            }
            if (v < nn) emit(static_cast<NodeId>(v), static_cast<NodeId>(w));
        }
    }
    return SignedGraph::from_edges(n, directed, std::move(edges));
}

namespace {

// First `take` elements of a uniformly shuffled [0,n) prefix, returned sorted.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t take, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < take; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

EdgeSplit split_edges(const SignedGraph& g, double train_fraction, std::uint64_t seed) {
    const std::size_t m = g.edges().size();
    if (m == 0) throw std::invalid_argument("cannot split a graph with no edges");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must be in (0, 1)");

    auto train_count =
        static_cast<std::size_t>(std::llround(static_cast<double>(m) * train_fraction));
    if (m >= 2) train_count = std::clamp<std::size_t>(train_count, 1, m - 1);
    else train_count = std::min<std::size_t>(train_count, m);

    auto rng = make_rng(seed, "edge-split");
    std::vector<std::size_t> picked = sample_indices(m, train_count, rng);

    std::vector<Edge> train_edges, test_edges;
    train_edges.reserve(train_count);
    test_edges.reserve(m - train_count);
    std::size_t next = 0;
    for (std::size_t k = 0; k < m; ++k) {
        if (next < picked.size() && picked[next] == k) {
            train_edges.push_back(g.edges()[k]);
            ++next;
        } else {
            test_edges.push_back(g.edges()[k]);
        }
    }

    EdgeSplit split{SignedGraph::from_edges(g.node_count(), g.directed(),
                                            std::move(train_edges), g.external_ids()),
                    std::move(test_edges)};
    return split;
}

OutgoingRemoval remove_outgoing(const SignedGraph& g, double test_node_fraction,
                                std::uint64_t seed) {
    if (!g.directed())
        throw std::invalid_argument("outgoing-edge removal requires a directed graph");
    if (!(test_node_fraction > 0.0 && test_node_fraction < 1.0))
        throw std::invalid_argument("test node fraction must be in (0, 1)");
    const std::size_t n = g.node_count();
    if (n < 2) throw std::invalid_argument("too few nodes to sample from");

    auto count = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * test_node_fraction));
    count = std::clamp<std::size_t>(count, 1, n - 1);

    auto rng = make_rng(seed, "remove-outgoing");
    std::vector<std::size_t> picked = sample_indices(n, count, rng);

    std::vector<char> is_test(n, 0);
    std::vector<NodeId> test_nodes;
    test_nodes.reserve(count);
    for (std::size_t v : picked) {
        is_test[v] = 1;
        test_nodes.push_back(static_cast<NodeId>(v));
    }

    std::vector<Edge> kept;
    kept.reserve(g.edges().size());
    for (const Edge& e : g.edges())
        if (!is_test[e.src]) kept.push_back(e);

    return {SignedGraph::from_edges(n, true, std::move(kept), g.external_ids()),
            std::move(test_nodes)};
}

}  // namespace signet
