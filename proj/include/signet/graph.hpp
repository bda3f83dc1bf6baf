#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace signet {

using NodeId = std::uint32_t;

// A signed edge. The weight carries both pieces of information: its
// magnitude is the strength of the tie, its sign the polarity.
struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    std::int32_t weight = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct WeightParts {
    std::uint32_t magnitude = 0;  // |w| >= 1
    int sign = 0;                 // -1 or +1
};

// Splits a nonzero weight into magnitude and sign. Throws on w == 0.
WeightParts decompose_weight(std::int64_t w);

// Weighted signed network, directed or undirected, with CSR adjacency.
// Immutable after construction; safe for concurrent reads.
//
// Node ids are dense. Inputs with sparse ids are remapped on load (ascending
// original id -> dense id) and the map is kept so that files written back out
// use the original ids.
class SignedGraph {
  public:
    // Validates and indexes the edge set. Throws std::invalid_argument on a
    // bad endpoint, zero weight, self-loop, duplicate edge, or (undirected)
    // duplicate reverse edge. `external_ids` maps dense id -> original id;
    // empty means identity.
    static SignedGraph from_edges(std::size_t node_count, bool directed,
                                  std::vector<Edge> edges,
                                  std::vector<std::int64_t> external_ids = {});

    std::size_t node_count() const { return node_count_; }
    bool directed() const { return directed_; }
    const std::vector<Edge>& edges() const { return edges_; }

    // Out-adjacency row, sorted by target. For undirected graphs this is the
    // full neighborhood (each stored edge is visible from both endpoints).
    std::span<const NodeId> out_neighbors(NodeId v) const;
    std::span<const std::int32_t> out_weights(NodeId v) const;
    std::size_t out_degree(NodeId v) const;

    // In-adjacency; empty spans for undirected graphs (use out_*).
    std::span<const NodeId> in_neighbors(NodeId v) const;
    std::span<const std::int32_t> in_weights(NodeId v) const;

    bool has_out_edge(NodeId src, NodeId dst) const;
    // Weight of the out-edge src->dst; throws if absent.
    std::int32_t out_edge_weight(NodeId src, NodeId dst) const;

    // Visits every neighbor of v in the undirected, sign-preserving view
    // (out plus in edges). A node pair connected in both directions is
    // visited twice, once per stored edge.
    template <class Fn>
    void for_each_undirected_neighbor(NodeId v, Fn&& fn) const {
        for (std::size_t k = out_offsets_[v]; k < out_offsets_[v + 1]; ++k)
            fn(out_targets_[k], out_edge_weights_[k]);
        if (directed_)
            for (std::size_t k = in_offsets_[v]; k < in_offsets_[v + 1]; ++k)
                fn(in_targets_[k], in_edge_weights_[k]);
    }

    // Identity mapping is represented by an empty vector.
    const std::vector<std::int64_t>& external_ids() const { return external_ids_; }
    std::int64_t external_id(NodeId v) const {
        return external_ids_.empty() ? static_cast<std::int64_t>(v) : external_ids_[v];
    }
    // Dense id for an original id; throws if unknown.
    NodeId internal_id(std::int64_t external) const;

    std::size_t positive_edge_count() const { return positive_edges_; }
    std::size_t negative_edge_count() const { return edges_.size() - positive_edges_; }

  private:
    SignedGraph() = default;

    std::size_t node_count_ = 0;
    bool directed_ = false;
    std::vector<Edge> edges_;
    std::size_t positive_edges_ = 0;

    std::vector<std::size_t> out_offsets_;
    std::vector<NodeId> out_targets_;
    std::vector<std::int32_t> out_edge_weights_;
    std::vector<std::size_t> in_offsets_;
    std::vector<NodeId> in_targets_;
    std::vector<std::int32_t> in_edge_weights_;

    std::vector<std::int64_t> external_ids_;
};

// Parses `src dst weight` lines ('#' starts a comment, blank lines skipped).
// Throws std::runtime_error with the offending line number on malformed
// input, zero weight, self-loop, duplicate or inconsistent edges.
SignedGraph load_edge_list(std::istream& in, bool directed);
SignedGraph load_edge_list_file(const std::string& path, bool directed);

// Writes edges back out in stored order using original ids. Reloading the
// result yields an identical graph.
void save_edge_list(const SignedGraph& g, std::ostream& out);
void save_edge_list_file(const SignedGraph& g, const std::string& path);

// node id -> class label, keyed by dense id. std::map keeps iteration
// deterministic for splits.
using NodeLabels = std::map<NodeId, int>;

// Parses `node label` lines; node ids are original ids and must exist in g.
NodeLabels load_labels(std::istream& in, const SignedGraph& g);
NodeLabels load_labels_file(const std::string& path, const SignedGraph& g);

// Erdos-Renyi signed graph: edge probability avg_degree/(n-1), weight +1,
// independently flipped to -1 with probability negative_fraction. Undirected
// by default; the directed variant orients each generated edge uniformly at
// random. Deterministic per seed.
SignedGraph generate_er_signed(std::size_t n, double avg_degree, double negative_fraction,
                               std::uint64_t seed, bool directed = false);

struct EdgeSplit {
    SignedGraph train;        // retains all nodes, possibly isolated
    std::vector<Edge> test;
};

// Uniform random edge partition; deterministic per seed.
EdgeSplit split_edges(const SignedGraph& g, double train_fraction, std::uint64_t seed);

struct OutgoingRemoval {
    SignedGraph reduced;            // same node set, out-edges of test nodes dropped
    std::vector<NodeId> test_nodes; // sorted
};

// Removes all out-edges of a random fraction of nodes (directed graphs only).
OutgoingRemoval remove_outgoing(const SignedGraph& g, double test_node_fraction,
                                std::uint64_t seed);

}  // namespace signet
