#pragma once

#include "signet/graph.hpp"
#include "signet/sampler.hpp"
#include "signet/trainer.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace signet {

enum class EdgeFeatureOp { concat, avg, hadamard, l1, l2 };

const char* to_string(EdgeFeatureOp op);
std::optional<EdgeFeatureOp> parse_feature_op(std::string_view name);

// concat -> f_i followed by f_j (2K); avg -> (f_i+f_j)/2; hadamard ->
// elementwise product; l1 -> elementwise |f_i-f_j|; l2 -> elementwise
// (f_i-f_j)^2 (all K).
std::vector<double> edge_features(std::span<const double> f_i, std::span<const double> f_j,
                                  EdgeFeatureOp op);

struct LogRegModel {
    std::vector<double> weights;
    double bias = 0.0;
    double l2_penalty = 0.0;

    double raw_score(std::span<const double> f) const;  // w.f + b
    double score(std::span<const double> f) const;      // sigma(w.f + b)
    int predict(std::span<const double> f) const;       // 1 iff score >= 0.5
};

struct LogRegOptions {
    double l2_penalty = 1e-4;
    std::size_t max_epochs = 500;
    double step = 0.0;              // <= 0 selects 1/L from the data
    double min_improvement = 1e-6;  // stop when loss improves less than this
    std::uint64_t seed = 0;         // kept for interface stability; full-batch
                                    // descent from zero needs no randomness
};

// Full-batch gradient descent on the L2-regularized logistic loss (bias
// unregularized). `features` is row-major with labels.size() rows of `dim`.
// Labels must contain both 0 and 1. Optionally records the per-epoch loss.
LogRegModel train_logreg(std::span<const double> features, std::size_t dim,
                         std::span<const int> labels, const LogRegOptions& opt,
                         std::vector<double>* loss_trace = nullptr);

// One-vs-rest wrapper; a two-class problem uses a single binary model.
struct MulticlassLogReg {
    std::vector<int> classes;  // sorted distinct training labels
    std::vector<LogRegModel> models;

    int predict(std::span<const double> f) const;
};

MulticlassLogReg train_multiclass_logreg(std::span<const double> features, std::size_t dim,
                                         std::span<const int> labels, const LogRegOptions& opt);

// Square confusion matrix over class indices 0..classes-1, count[truth][pred].
struct ConfusionCounts {
    std::size_t classes = 0;
    std::vector<std::uint64_t> counts;

    explicit ConfusionCounts(std::size_t k = 0) : classes(k), counts(k * k, 0) {}
    void add(std::size_t truth, std::size_t pred) { ++counts[truth * classes + pred]; }
    std::uint64_t at(std::size_t truth, std::size_t pred) const {
        return counts[truth * classes + pred];
    }
    std::uint64_t total() const;
};

// Builds counts from parallel truth/prediction label arrays; `classes` is the
// sorted label universe and must cover every value that appears.
ConfusionCounts make_confusion(std::span<const int> truth, std::span<const int> predicted,
                               std::span<const int> classes);

// F1 over pooled TP/FP/FN across classes; equals accuracy for single-label
// tasks. Throws on empty counts.
double micro_f1(const ConfusionCounts& m);
// Unweighted mean of per-class F1, where a class with 2TP+FP+FN = 0 scores 0.
double macro_f1(const ConfusionCounts& m);

struct DistanceStats {
    double mean_pos = 0.0, sd_pos = 0.0;
    double mean_neg = 0.0, sd_neg = 0.0;
    std::uint64_t count_pos = 0, count_neg = 0;
    std::optional<double> ratio;  // mean_pos/mean_neg; absent unless both
                                  // signs occur and mean_neg > 0
};

// Euclidean distance statistics over the given edges, split by edge sign.
DistanceStats distance_stats(const FinalEmbedding& emb, std::span<const Edge> edges);

// Fixed synthetic benchmark: 200 nodes in two equal communities, positive
// intra-community edges (expected intra-degree 8), negative inter-community
// edges (expected inter-degree 4). Balanced by construction, so targeted
// caches resolve without conflicts.
SignedGraph two_community_graph(std::uint64_t seed, bool directed = false);
NodeLabels two_community_labels();

struct ExperimentRow {
    std::string experiment;
    std::string mode;  // "targeted" or "ns"
    std::string op;    // feature operator, "-" when not applicable
    int repeat = 0;    // -1 renders as "mean"
    double micro = 0.0;
    double macro = 0.0;
    std::optional<double> ratio;
};

// `experiment, mode, operator, repeat, micro_f1, macro_f1, ratio` with 4
// decimal places; absent ratios stay empty.
void write_results_csv(std::span<const ExperimentRow> rows, std::ostream& out);

struct ExperimentConfig {
    TrainConfig train;
    WalkConfig walks;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    LogRegOptions logreg;
};

struct EdgeSignOutcome {
    std::vector<ExperimentRow> rows;  // one per repeat plus a mean row
    // test edges touching a node that ended up isolated in the training
    // split, averaged over repeats; such edges are scored with the node's
    // untouched initial vectors
    double isolated_edge_fraction = 0.0;
    // realized negative-edge fraction of (train, test) per repeat; splits are
    // uniform over edges, not stratified by sign
    std::vector<std::pair<double, double>> split_negative_fractions;
};

// Per repeat: 50/50 edge split, embed the training half, fit logistic
// regression on training-edge features vs signs, score the held-out edges.
// Split seeds depend only on (seed, repeat), so runs with different train
// modes compare on identical splits.
EdgeSignOutcome edge_sign_experiment(const SignedGraph& g, const ExperimentConfig& cfg,
                                     EdgeFeatureOp op);

// Per repeat: embed the full graph, split labeled nodes 50/50, fit, score.
std::vector<ExperimentRow> node_label_experiment(const SignedGraph& g, const NodeLabels& labels,
                                                 const ExperimentConfig& cfg);

// For each fraction and each mode {targeted, ns}: drop all out-edges of the
// sampled test nodes (fraction 0 keeps the graph and falls back to a plain
// 50/50 labeled split), embed, fit on non-test labeled nodes, score test
// nodes. Node selection depends only on (seed, fraction index), shared
// across modes.
std::vector<ExperimentRow> partial_info_experiment(const SignedGraph& g,
                                                   const NodeLabels& labels,
                                                   const ExperimentConfig& cfg,
                                                   std::span<const double> fractions);

}  // namespace signet
