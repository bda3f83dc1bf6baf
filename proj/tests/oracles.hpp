// Independent reference implementations used to cross-check the library.
// Everything here favors brute force over cleverness; keep it that way.
#pragma once

#include "signet/graph.hpp"
#include "signet/sampler.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace oracles {

struct ShortestPathInfo {
    std::size_t length = 0;
    std::size_t max_positive = 0;
};

// Enumerates every shortest undirected path between two nodes and keeps the
// highest positive-edge count. Exponential in the worst case; callers keep
// graphs small.
std::optional<ShortestPathInfo> shortest_path_info(const signet::SignedGraph& g,
                                                   signet::NodeId from, signet::NodeId to);

inline int resolved_sign(const ShortestPathInfo& info) {
    return (info.length - info.max_positive) % 2 == 0 ? 1 : -1;
}

// Balance check by BFS two-coloring over the undirected view.
bool balanced_by_coloring(const signet::SignedGraph& g);

// Balance check by trying all 2^n colorings. Only for tiny graphs.
bool balanced_by_enumeration(const signet::SignedGraph& g);

// Random connected-ish test graphs; node count is drawn in [3, max_nodes].
signet::SignedGraph random_signed_graph(std::size_t max_nodes, double edge_prob,
                                        double negative_prob, std::uint64_t seed,
                                        bool directed = false);

// Balanced by construction: color nodes first, sign edges by the coloring.
signet::SignedGraph random_balanced_graph(std::size_t max_nodes, double edge_prob,
                                          std::uint64_t seed);

// Recomputes each prefix sign product from scratch.
std::vector<int> prefix_sign_products(const signet::SignedGraph& g,
                                      std::span<const signet::NodeId> walk);

// Nodes reachable from `from` by following out-edges for at most max_steps.
std::vector<signet::NodeId> reachable_within(const signet::SignedGraph& g, signet::NodeId from,
                                             std::size_t max_steps);

// Sum of log sigmoid(sign_k * <x, ctx_k>) with the naive sigmoid formula.
double pair_objective(std::span<const double> x, std::span<const std::vector<double>> ctxs,
                      std::span<const int> signs);

// |count - trials*p| within three binomial standard deviations.
bool within_three_sigma(double count, double trials, double p);

}  // namespace oracles
