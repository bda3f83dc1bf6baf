#include "signet/sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>

namespace signet {

namespace {

int sign_of(std::int32_t w) { return w > 0 ? +1 : -1; }

// Sign of the edge a walk traversed: the out-edge in directed graphs.
int walk_step_sign(const SignedGraph& g, NodeId a, NodeId b) {
    return sign_of(g.out_edge_weight(a, b));
}

// Sign for a step of a path in the undirected view; prefers the forward edge
// when a directed graph has both orientations.
int undirected_step_sign(const SignedGraph& g, NodeId a, NodeId b) {
    if (g.has_out_edge(a, b)) return sign_of(g.out_edge_weight(a, b));
    if (g.directed() && g.has_out_edge(b, a)) return sign_of(g.out_edge_weight(b, a));
    throw std::invalid_argument("nodes " + std::to_string(a) + " and " + std::to_string(b) +
                                " are not adjacent");
}

}  // namespace

std::vector<NodeId> random_walk(const SignedGraph& g, NodeId start, std::size_t l, Rng& rng) {
    std::vector<NodeId> walk;
    walk.reserve(l);
    NodeId cur = start;
    for (std::size_t step = 0; step < l; ++step) {
        auto row = g.out_neighbors(cur);
        if (row.empty()) break;
        cur = row[static_cast<std::size_t>(uniform_below(rng, row.size()))];
        walk.push_back(cur);
    }
    return walk;
}

std::vector<int> estimate_walk_signs(const SignedGraph& g, NodeId start,
                                     std::span<const NodeId> walk) {
    std::vector<int> signs;
    signs.reserve(walk.size());
    int running = +1;
    NodeId prev = start;
    for (NodeId cur : walk) {
        running *= walk_step_sign(g, prev, cur);
        signs.push_back(running);
        prev = cur;
    }
    return signs;
}

int resolve_conflict(const SignedGraph& g, NodeId i, NodeId u) {
    const std::size_t n = g.node_count();
    std::vector<std::int32_t> dist(n, -1);
    std::vector<std::int32_t> max_pos(n, 0);
    std::vector<NodeId> queue;
    queue.reserve(64);
    dist[i] = 0;
    queue.push_back(i);

    for (std::size_t head = 0; head < queue.size(); ++head) {
        NodeId v = queue[head];
        // Once we pop at the target's depth, every shortest path into the
        // target has been relaxed.
        if (dist[u] >= 0 && dist[v] >= dist[u]) break;
        g.for_each_undirected_neighbor(v, [&](NodeId w, std::int32_t wt) {
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if (dist[w] == dist[v] + 1) {
                std::int32_t cand = max_pos[v] + (wt > 0 ? 1 : 0);
                if (cand > max_pos[w]) max_pos[w] = cand;
            }
        });
    }

    if (dist[u] < 0)
        throw std::invalid_argument("node " + std::to_string(u) + " is unreachable from " +
                                    std::to_string(i));
    return (dist[u] - max_pos[u]) % 2 == 0 ? +1 : -1;
}

namespace {

// Disjoint sets carrying the parity of each element relative to its root.
class ParityDsu {
  public:
    explicit ParityDsu(std::size_t n) : parent_(n), parity_(n, 0), rank_(n, 0) {
        for (std::size_t k = 0; k < n; ++k) parent_[k] = k;
    }

    std::pair<std::size_t, unsigned> find(std::size_t x) {
        unsigned p = 0;
        std::size_t root = x;
        while (parent_[root] != root) {
            p ^= parity_[root];
            root = parent_[root];
        }
        // path compression, re-accumulating parity to the root
        std::size_t cur = x;
        unsigned cur_p = p;
        while (parent_[cur] != root) {
            std::size_t next = parent_[cur];
            unsigned next_p = cur_p ^ parity_[cur];
            parent_[cur] = root;
            parity_[cur] = cur_p;
            cur = next;
            cur_p = next_p;
        }
        return {root, p};
    }

    // Returns false if merging with relation `rel` (0 same side, 1 opposite)
    // contradicts what is already known.
    bool merge(std::size_t a, std::size_t b, unsigned rel) {
        auto [ra, pa] = find(a);
        auto [rb, pb] = find(b);
        if (ra == rb) return (pa ^ pb) == rel;
        if (rank_[ra] < rank_[rb]) {
            std::swap(ra, rb);
            std::swap(pa, pb);
        }
        parent_[rb] = ra;
        parity_[rb] = pa ^ pb ^ rel;
        if (rank_[ra] == rank_[rb]) ++rank_[ra];
        return true;
    }

  private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned char> parity_;
    std::vector<unsigned char> rank_;
};

}  // namespace

bool detect_unbalanced_cycle(const SignedGraph& g, std::span<const NodeId> path_a,
                             std::span<const NodeId> path_b) {
    if (path_a.empty() || path_b.empty())
        throw std::invalid_argument("paths must be nonempty");
    if (path_a.front() != path_b.front() || path_a.back() != path_b.back())
        throw std::invalid_argument("paths must share both endpoints");

    std::unordered_map<NodeId, std::size_t> index;
    auto id_of = [&](NodeId v) {
        return index.emplace(v, index.size()).first->second;
    };
    struct Constraint {
        std::size_t a, b;
        unsigned rel;
    };
    std::vector<Constraint> constraints;
    auto add_path = [&](std::span<const NodeId> path) {
        for (std::size_t k = 1; k < path.size(); ++k) {
            int s = undirected_step_sign(g, path[k - 1], path[k]);
            constraints.push_back({id_of(path[k - 1]), id_of(path[k]), s < 0 ? 1u : 0u});
        }
    };
    add_path(path_a);
    add_path(path_b);

    ParityDsu dsu(index.size());
    for (const Constraint& c : constraints)
        if (!dsu.merge(c.a, c.b, c.rel)) return true;
    return false;
}

namespace {

struct SideBits {
    static constexpr int kPositive = 1;
    static constexpr int kNegative = 2;
};

void build_cache_range(const SignedGraph& g, const WalkConfig& cfg, NodeId lo, NodeId hi,
                       NodeCache& cache, std::size_t& conflicts,
                       std::vector<ConflictWitness>& witnesses) {
    std::unordered_map<NodeId, int> seen;
    std::unordered_map<NodeId, std::array<std::vector<NodeId>, 2>> prefixes;
    std::vector<std::pair<NodeId, int>> entries;

    for (NodeId i = lo; i < hi; ++i) {
        seen.clear();
        prefixes.clear();
        for (std::size_t k = 0; k < cfg.walks_per_node; ++k) {
            auto rng = make_rng(cfg.seed, "walks",
                                static_cast<std::uint64_t>(i) * cfg.walks_per_node + k);
            std::vector<NodeId> walk = random_walk(g, i, cfg.walk_length, rng);
            std::vector<int> signs = estimate_walk_signs(g, i, walk);
            for (std::size_t p = 0; p < walk.size(); ++p) {
                NodeId u = walk[p];
                if (u == i || g.has_out_edge(i, u)) continue;
                int bit = signs[p] > 0 ? SideBits::kPositive : SideBits::kNegative;
                int& bits = seen[u];
                if (cfg.record_witnesses && !(bits & bit)) {
                    auto& pair = prefixes[u];
                    auto& path = pair[signs[p] > 0 ? 0 : 1];
                    path.clear();
                    path.push_back(i);
                    path.insert(path.end(), walk.begin(), walk.begin() + (p + 1));
                }
                bits |= bit;
            }
        }

        entries.assign(seen.begin(), seen.end());
        std::sort(entries.begin(), entries.end());
        for (auto [u, bits] : entries) {
            if (bits == (SideBits::kPositive | SideBits::kNegative)) {
                ++conflicts;
                int resolved = resolve_conflict(g, i, u);
                (resolved > 0 ? cache.positive[i] : cache.negative[i]).push_back(u);
                if (cfg.record_witnesses) {
                    auto& pair = prefixes[u];
                    witnesses.push_back({i, u, std::move(pair[0]), std::move(pair[1]), resolved});
                }
            } else if (bits == SideBits::kPositive) {
                cache.positive[i].push_back(u);
            } else {
                cache.negative[i].push_back(u);
            }
        }
    }
}

}  // namespace

NodeCache build_cache(const SignedGraph& g, const WalkConfig& cfg) {
    if (cfg.walk_length < 2)
        throw std::invalid_argument("walk length must be at least 2");
    if (cfg.walks_per_node < 1)
        throw std::invalid_argument("walks per node must be at least 1");
    if (cfg.threads < 1) throw std::invalid_argument("thread count must be at least 1");

    const std::size_t n = g.node_count();
    NodeCache cache;
    cache.positive.resize(n);
    cache.negative.resize(n);

    std::size_t workers = std::min<std::size_t>(cfg.threads, std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        build_cache_range(g, cfg, 0, static_cast<NodeId>(n), cache, cache.conflict_count,
                          cache.witnesses);
        return cache;
    }

    std::vector<std::size_t> conflict_counts(workers, 0);
    std::vector<std::vector<ConflictWitness>> witness_parts(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        NodeId lo = static_cast<NodeId>(n * t / workers);
        NodeId hi = static_cast<NodeId>(n * (t + 1) / workers);
        pool.emplace_back([&, t, lo, hi] {
            build_cache_range(g, cfg, lo, hi, cache, conflict_counts[t], witness_parts[t]);
        });
    }
    for (auto& th : pool) th.join();
    for (std::size_t t = 0; t < workers; ++t) {
        cache.conflict_count += conflict_counts[t];
        cache.witnesses.insert(cache.witnesses.end(),
                               std::make_move_iterator(witness_parts[t].begin()),
                               std::make_move_iterator(witness_parts[t].end()));
    }
    return cache;
}

void sample_noise(const SignedGraph& g, NodeId i, int edge_sign, std::size_t count, Rng& rng,
                  std::vector<TargetedDraw>& out) {
    const std::size_t n = g.node_count();
    const std::size_t excluded = 1 + g.out_degree(i);
    if (excluded >= n) return;  // no non-neighbor exists
    for (std::size_t k = 0; k < count; ++k) {
        NodeId v;
        do {
            v = static_cast<NodeId>(uniform_below(rng, n));
        } while (v == i || g.has_out_edge(i, v));
        out.push_back({v, -edge_sign, true});
    }
}

void sample_targeted(const NodeCache& cache, const SignedGraph& g, NodeId i, int edge_sign,
                     std::size_t count, Rng& rng, std::vector<TargetedDraw>& out) {
    const std::vector<NodeId>& side = edge_sign > 0 ? cache.negative[i] : cache.positive[i];
    if (side.empty()) {
        sample_noise(g, i, edge_sign, count, rng, out);
        return;
    }
    const int sign = edge_sign > 0 ? -1 : +1;
    for (std::size_t k = 0; k < count; ++k) {
        NodeId u = side[static_cast<std::size_t>(uniform_below(rng, side.size()))];
        out.push_back({u, sign, false});
    }
}

AliasTable::AliasTable(std::span<const double> weights) {
    const std::size_t m = weights.size();
    if (m == 0) throw std::invalid_argument("alias table needs at least one outcome");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("alias table weights must be finite and non-negative");
    total_ = 0.0;
    for (double w : weights) total_ += w;
    if (!(total_ > 0.0)) throw std::invalid_argument("alias table needs positive total weight");

    prob_.assign(m, 0.0);
    alias_.assign(m, 0);
    std::vector<std::uint32_t> small, large;
    small.reserve(m);
    large.reserve(m);
    std::vector<double> scaled(m);
    for (std::size_t k = 0; k < m; ++k) {
        scaled[k] = weights[k] * static_cast<double>(m) / total_;
        (scaled[k] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(k));
    }
    while (!small.empty() && !large.empty()) {
        std::uint32_t s = small.back();
        std::uint32_t l = large.back();
        small.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::uint32_t k : large) {
        prob_[k] = 1.0;
        alias_[k] = k;
    }
    for (std::uint32_t k : small) {
        prob_[k] = 1.0;
        alias_[k] = k;
    }
}

std::size_t AliasTable::draw(Rng& rng) const {
    auto k = static_cast<std::size_t>(uniform_below(rng, prob_.size()));
    return uniform01(rng) < prob_[k] ? k : alias_[k];
}

AliasTable build_edge_alias(const SignedGraph& g) {
    if (g.edges().empty()) throw std::invalid_argument("graph has no edges to sample");
    std::vector<double> weights;
    weights.reserve(g.edges().size());
    for (const Edge& e : g.edges())
        weights.push_back(static_cast<double>(decompose_weight(e.weight).magnitude));
    return AliasTable(weights);
}

Edge draw_edge(const SignedGraph& g, const AliasTable& table, Rng& rng) {
    return g.edges()[table.draw(rng)];
}

void dump_cache(const NodeCache& cache, const SignedGraph& g, std::ostream& out) {
    for (std::size_t i = 0; i < cache.node_count(); ++i) {
        out << g.external_id(static_cast<NodeId>(i)) << " [+]";
        for (NodeId u : cache.positive[i]) out << ' ' << g.external_id(u);
        out << " [-]";
        for (NodeId u : cache.negative[i]) out << ' ' << g.external_id(u);
        out << '\n';
    }
}

}  // namespace signet
