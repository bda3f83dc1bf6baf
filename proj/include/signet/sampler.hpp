#pragma once

#include "signet/graph.hpp"
#include "signet/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace signet {

struct WalkConfig {
    std::size_t walk_length = 50;    // steps per walk; >= 2 or nothing beyond neighbors is seen
    std::size_t walks_per_node = 1;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool record_witnesses = false;   // keep the walk prefixes behind each conflict
};

// Two walk prefixes that reached `target` from `source` with opposite
// estimated signs. Kept only when WalkConfig::record_witnesses is set.
struct ConflictWitness {
    NodeId source = 0;
    NodeId target = 0;
    std::vector<NodeId> positive_path;  // source .. target, sign product +1
    std::vector<NodeId> negative_path;  // source .. target, sign product -1
    int resolved_sign = 0;
};

// Per-node candidate sets for targeted sampling. A node u lands in
// positive[i] when walks from i estimate a net positive relationship,
// negative[i] otherwise. Sides are sorted, deduplicated, disjoint, and never
// contain i or a direct out-neighbor of i.
struct NodeCache {
    std::vector<std::vector<NodeId>> positive;
    std::vector<std::vector<NodeId>> negative;
    std::size_t conflict_count = 0;
    std::vector<ConflictWitness> witnesses;

    std::size_t node_count() const { return positive.size(); }
};

// Uniform random walk over out-edges (all edges when undirected). Returns up
// to `l` successor nodes, stopping early at a sink; an empty result means the
// start itself is a sink.
std::vector<NodeId> random_walk(const SignedGraph& g, NodeId start, std::size_t l, Rng& rng);

// Sign product of each walk prefix: out[p] is the product of edge signs along
// start -> walk[0] -> ... -> walk[p]. Throws if consecutive entries are not
// adjacent.
std::vector<int> estimate_walk_signs(const SignedGraph& g, NodeId start,
                                     std::span<const NodeId> walk);

// Runs walks_per_node walks of walk_length from every node and buckets the
// reachable non-neighbors by estimated sign. Nodes seen with both signs are
// settled by resolve_conflict. Deterministic for a given seed regardless of
// thread count (each node owns a derived RNG stream).
NodeCache build_cache(const SignedGraph& g, const WalkConfig& cfg);

// Net sign between i and u via shortest paths in the undirected, unsigned
// view: (-1)^(d - p*), with d the shortest-path distance and p* the maximum
// number of positive edges over all shortest paths (dynamic programming over
// the BFS DAG). Throws if u is unreachable.
int resolve_conflict(const SignedGraph& g, NodeId i, NodeId u);

// True iff the union of the two paths' edges contains a cycle with an odd
// number of negative edges, decided by sign-parity two-coloring. Both inputs
// must be node paths between the same endpoints, adjacent step by step in the
// undirected view.
bool detect_unbalanced_cycle(const SignedGraph& g, std::span<const NodeId> path_a,
                             std::span<const NodeId> path_b);

struct TargetedDraw {
    NodeId node = 0;
    int sign = 0;         // estimated (cache) or assumed (fallback) sign
    bool fallback = false;
};

// Uniform draws over all nodes that are neither i nor out-neighbors of i,
// with assumed sign -edge_sign (classical negative sampling). Appends nothing
// when no such node exists.
void sample_noise(const SignedGraph& g, NodeId i, int edge_sign, std::size_t count, Rng& rng,
                  std::vector<TargetedDraw>& out);

// The tau selector: draws `count` nodes with replacement from negative[i]
// when edge_sign = +1, from positive[i] when edge_sign = -1, each carrying
// its stored sign. Falls back to sample_noise when the required side is
// empty. Results are appended to `out`.
void sample_targeted(const NodeCache& cache, const SignedGraph& g, NodeId i, int edge_sign,
                     std::size_t count, Rng& rng, std::vector<TargetedDraw>& out);

// Walker alias table: O(m) construction, O(1) draws, draw probability of
// outcome k exactly weight_k / total.
class AliasTable {
  public:
    AliasTable() = default;
    explicit AliasTable(std::span<const double> weights);

    std::size_t draw(Rng& rng) const;
    std::size_t size() const { return prob_.size(); }
    double total_weight() const { return total_; }

  private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
    double total_ = 0.0;
};

// Edge sampler weighted by magnitude |w|.
AliasTable build_edge_alias(const SignedGraph& g);
Edge draw_edge(const SignedGraph& g, const AliasTable& table, Rng& rng);

// Debug dump, one line per node: `i [+] u1 u2 ... [-] w1 w2 ...` with
// external ids.
void dump_cache(const NodeCache& cache, const SignedGraph& g, std::ostream& out);

}  // namespace signet
