#pragma once

#include "signet/graph.hpp"
#include "signet/rng.hpp"
#include "signet/sampler.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace signet {

enum class SampleMode { targeted, negative_sampling };

struct TrainConfig {
    std::size_t dimension = 40;               // K; even in directed mode
    std::uint64_t total_samples = 100'000'000; // T, counted in edge draws
    std::size_t negatives_per_edge = 5;        // N
    double initial_step = 0.025;               // rho_0
    SampleMode mode = SampleMode::targeted;
    bool directed = false;
    std::size_t threads = 1;
    std::uint64_t seed = 0;
};

// Exact logistic function with the argument clamped to [-6, 6].
double sigmoid(double a);
// Unclamped variants, used by gradient oracles and objective accounting.
double sigmoid_unclamped(double a);
double log_sigmoid_unclamped(double a);

// 1024-bin lookup over [-6, 6] for sigma and log sigma; arguments outside the
// range saturate. This is the hot-path approximation of `sigmoid`.
class SigmoidTable {
  public:
    SigmoidTable();
    double value(double a) const {
        return sig_[bin(a)];
    }
    double log_value(double a) const {
        return log_[bin(a)];
    }

  private:
    static constexpr std::size_t kBins = 1024;
    static constexpr double kBound = 6.0;
    std::size_t bin(double a) const {
        if (a <= -kBound) return 0;
        if (a >= kBound) return kBins;
        return static_cast<std::size_t>((a + kBound) * (static_cast<double>(kBins) / (2 * kBound)));
    }
    std::array<double, kBins + 1> sig_{};
    std::array<double, kBins + 1> log_{};
};

// sigma(s * <c, x>)
double pair_score(std::span<const double> x_i, std::span<const double> c_j, int s);

// Node vectors x_i plus, in directed mode, context vectors phi_i of the same
// width. In undirected mode context(v) aliases x(v).
class EmbeddingMatrix {
  public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t node_count, std::size_t dim, bool directed)
        : node_count_(node_count), dim_(dim), directed_(directed),
          x_(node_count * dim, 0.0), ctx_(directed ? node_count * dim : 0, 0.0) {}

    std::size_t node_count() const { return node_count_; }
    std::size_t dim() const { return dim_; }  // width of one vector (K or K/2)
    bool directed() const { return directed_; }

    double* x(NodeId v) { return x_.data() + static_cast<std::size_t>(v) * dim_; }
    const double* x(NodeId v) const { return x_.data() + static_cast<std::size_t>(v) * dim_; }
    double* context(NodeId v) {
        return directed_ ? ctx_.data() + static_cast<std::size_t>(v) * dim_ : x(v);
    }
    const double* context(NodeId v) const {
        return directed_ ? ctx_.data() + static_cast<std::size_t>(v) * dim_ : x(v);
    }

    bool all_finite() const;

  private:
    std::size_t node_count_ = 0;
    std::size_t dim_ = 0;
    bool directed_ = false;
    std::vector<double> x_;
    std::vector<double> ctx_;
};

// x entries i.i.d. uniform in [-0.5/D, 0.5/D] with D the per-vector width;
// context vectors start at zero.
EmbeddingMatrix init_embeddings(const SignedGraph& g, const TrainConfig& cfg, Rng& rng);

// One ascent step on the per-edge objective
//   O_ij = log sigma(s_ij <c_j, x_i>) + sum_n log sigma(s~_n <c_n, x_i>).
// For each term, the context vector moves by rho*g*x_i (pre-update x_i) and
// x_i accumulates rho*g*c (pre-update c), applied once after all terms.
// Returns O_ij evaluated at the pre-update parameters. Pass lut = nullptr for
// exact, unclamped sigmoids (oracle mode). Throws on a non-finite objective.
double edge_update(EmbeddingMatrix& emb, const Edge& e, std::span<const TargetedDraw> samples,
                   double rho, const SigmoidTable* lut);

// rho_0 * max(1 - t/total, 1e-4)
double step_size(double rho0, std::uint64_t t, std::uint64_t total);

// Per-node output vectors f_i: x_i in undirected mode, x_i followed by phi_i
// in directed mode.
struct FinalEmbedding {
    std::size_t dim = 0;  // K
    std::vector<double> data;

    std::size_t node_count() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> row(NodeId v) const {
        return {data.data() + static_cast<std::size_t>(v) * dim, dim};
    }
};

FinalEmbedding final_embedding(const EmbeddingMatrix& emb, bool directed);

struct TrainStats {
    std::uint64_t iterations = 0;
    double early_objective = 0.0;     // mean O_ij, first 10% of iterations
    double late_objective = 0.0;      // mean O_ij, last 10%
    std::uint64_t fallback_draws = 0; // targeted draws served by noise sampling
    double optimize_seconds = 0.0;
};

struct TrainResult {
    EmbeddingMatrix embedding;
    TrainStats stats;
};

// Runs cfg.total_samples edge draws from the magnitude-weighted alias table,
// each followed by one edge_update with N partner draws (tau selector in
// targeted mode, uniform non-neighbor noise in negative-sampling mode).
// Undirected edges are processed from a uniformly chosen endpoint. `cache` is
// required in targeted mode and ignored otherwise. Single-thread runs are
// bitwise deterministic per seed; multi-thread runs share the matrix without
// locks.
TrainResult train(const SignedGraph& g, const NodeCache* cache, const TrainConfig& cfg);

// Text format: header `node_count K`, then `id f_1 ... f_K` per node using
// external ids, fixed 6-decimal floats.
void save_embedding(const FinalEmbedding& emb, const SignedGraph& g, std::ostream& out);
void save_embedding_file(const FinalEmbedding& emb, const SignedGraph& g,
                         const std::string& path);
// Reads the format back, mapping external ids through g; validates the node
// count and id set against g.
FinalEmbedding load_embedding(std::istream& in, const SignedGraph& g);
FinalEmbedding load_embedding_file(const std::string& path, const SignedGraph& g);

}  // namespace signet
