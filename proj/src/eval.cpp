#include "signet/eval.hpp"

#include "signet/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace signet {

const char* to_string(EdgeFeatureOp op) {
    switch (op) {
        case EdgeFeatureOp::concat: return "concat";
        case EdgeFeatureOp::avg: return "avg";
        case EdgeFeatureOp::hadamard: return "hadamard";
        case EdgeFeatureOp::l1: return "l1";
        case EdgeFeatureOp::l2: return "l2";
    }
    return "?";
}

std::optional<EdgeFeatureOp> parse_feature_op(std::string_view name) {
    if (name == "concat") return EdgeFeatureOp::concat;
    if (name == "avg") return EdgeFeatureOp::avg;
    if (name == "hadamard") return EdgeFeatureOp::hadamard;
    if (name == "l1") return EdgeFeatureOp::l1;
    if (name == "l2") return EdgeFeatureOp::l2;
    return std::nullopt;
}

std::vector<double> edge_features(std::span<const double> f_i, std::span<const double> f_j,
                                  EdgeFeatureOp op) {
    if (f_i.size() != f_j.size())
        throw std::invalid_argument("edge features need equal dimensions");
    const std::size_t k = f_i.size();
    std::vector<double> out;
    switch (op) {
        case EdgeFeatureOp::concat:
            out.reserve(2 * k);
            out.insert(out.end(), f_i.begin(), f_i.end());
            out.insert(out.end(), f_j.begin(), f_j.end());
            break;
        case EdgeFeatureOp::avg:
            out.resize(k);
            for (std::size_t t = 0; t < k; ++t) out[t] = 0.5 * (f_i[t] + f_j[t]);
            break;
        case EdgeFeatureOp::hadamard:
            out.resize(k);
            for (std::size_t t = 0; t < k; ++t) out[t] = f_i[t] * f_j[t];
            break;
        case EdgeFeatureOp::l1:
            out.resize(k);
            for (std::size_t t = 0; t < k; ++t) out[t] = std::abs(f_i[t] - f_j[t]);
            break;
        case EdgeFeatureOp::l2:
            out.resize(k);
            for (std::size_t t = 0; t < k; ++t) {
                double d = f_i[t] - f_j[t];
                out[t] = d * d;
            }
            break;
    }
    return out;
}

double LogRegModel::raw_score(std::span<const double> f) const {
    if (f.size() != weights.size())
        throw std::invalid_argument("feature dimension does not match the model");
    return kern::dot(weights.data(), f.data(), f.size()) + bias;
}

double LogRegModel::score(std::span<const double> f) const {
    return sigmoid_unclamped(raw_score(f));
}

int LogRegModel::predict(std::span<const double> f) const { return score(f) >= 0.5 ? 1 : 0; }

namespace {

double softplus(double z) {
    // log(1 + e^z), stable at both tails
    return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0);
}

}  // namespace

LogRegModel train_logreg(std::span<const double> features, std::size_t dim,
                         std::span<const int> labels, const LogRegOptions& opt,
                         std::vector<double>* loss_trace) {
    const std::size_t n = labels.size();
    if (n == 0) throw std::invalid_argument("empty training set");
    if (dim == 0) throw std::invalid_argument("features need at least one dimension");
    if (features.size() != n * dim)
        throw std::invalid_argument("feature matrix shape does not match the labels");
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y == 0) has0 = true;
        else if (y == 1) has1 = true;
        else throw std::invalid_argument("binary labels must be 0 or 1");
    }
    if (!has0 || !has1)
        throw std::invalid_argument("training labels must contain both classes");

    double step = opt.step;
    if (step <= 0.0) {
        // 1/L for the logistic loss with a bias column appended
        double mean_sq = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double* row = features.data() + r * dim;
            mean_sq += kern::dot(row, row, dim) + 1.0;
        }
        mean_sq /= static_cast<double>(n);
        step = 1.0 / (0.25 * mean_sq + opt.l2_penalty);
    }

    LogRegModel model;
    model.weights.assign(dim, 0.0);
    model.bias = 0.0;
    model.l2_penalty = opt.l2_penalty;

    std::vector<double> grad(dim, 0.0);
    double prev_loss = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < opt.max_epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        double loss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double* row = features.data() + r * dim;
            double z = kern::dot(model.weights.data(), row, dim) + model.bias;
            double y = static_cast<double>(labels[r]);
            loss += softplus(z) - y * z;
            double residual = sigmoid_unclamped(z) - y;
            kern::axpy(residual, row, grad.data(), dim);
            grad_b += residual;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        loss *= inv_n;
        loss += 0.5 * opt.l2_penalty *
                kern::dot(model.weights.data(), model.weights.data(), dim);
        for (double& gv : grad) gv *= inv_n;
        kern::axpy(opt.l2_penalty, model.weights.data(), grad.data(), dim);
        grad_b *= inv_n;

        if (loss_trace) loss_trace->push_back(loss);
        if (prev_loss - loss < opt.min_improvement) break;
        prev_loss = loss;

        kern::axpy(-step, grad.data(), model.weights.data(), dim);
        model.bias -= step * grad_b;
    }
    return model;
}

int MulticlassLogReg::predict(std::span<const double> f) const {
    if (models.size() == 1)
        return models[0].predict(f) == 1 ? classes[1] : classes[0];
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < models.size(); ++k) {
        double s = models[k].raw_score(f);
        if (s > best_score) {
            best_score = s;
            best = k;
        }
    }
    return classes[best];
}

MulticlassLogReg train_multiclass_logreg(std::span<const double> features, std::size_t dim,
                                         std::span<const int> labels, const LogRegOptions& opt) {
    MulticlassLogReg clf;
    clf.classes.assign(labels.begin(), labels.end());
    std::sort(clf.classes.begin(), clf.classes.end());
    clf.classes.erase(std::unique(clf.classes.begin(), clf.classes.end()), clf.classes.end());
    if (clf.classes.size() < 2)
        throw std::invalid_argument("classification needs at least two label classes");

    std::vector<int> binary(labels.size());
    if (clf.classes.size() == 2) {
        for (std::size_t r = 0; r < labels.size(); ++r)
            binary[r] = labels[r] == clf.classes[1] ? 1 : 0;
        clf.models.push_back(train_logreg(features, dim, binary, opt));
        return clf;
    }
    for (int cls : clf.classes) {
        for (std::size_t r = 0; r < labels.size(); ++r) binary[r] = labels[r] == cls ? 1 : 0;
        clf.models.push_back(train_logreg(features, dim, binary, opt));
    }
    return clf;
}

std::uint64_t ConfusionCounts::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ConfusionCounts make_confusion(std::span<const int> truth, std::span<const int> predicted,
                               std::span<const int> classes) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("truth and prediction sizes differ");
    auto index_of = [&](int label) {
        auto it = std::lower_bound(classes.begin(), classes.end(), label);
        if (it == classes.end() || *it != label)
            throw std::invalid_argument("label " + std::to_string(label) +
                                        " outside the class universe");
        return static_cast<std::size_t>(it - classes.begin());
    };
    ConfusionCounts m(classes.size());
    for (std::size_t k = 0; k < truth.size(); ++k)
        m.add(index_of(truth[k]), index_of(predicted[k]));
    return m;
}

double micro_f1(const ConfusionCounts& m) {
    if (m.classes == 0 || m.total() == 0)
        throw std::invalid_argument("empty confusion counts");
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t c = 0; c < m.classes; ++c) {
        std::uint64_t diag = m.at(c, c);
        std::uint64_t row = 0, col = 0;
        for (std::size_t k = 0; k < m.classes; ++k) {
            row += m.at(c, k);
            col += m.at(k, c);
        }
        tp += diag;
        fn += row - diag;
        fp += col - diag;
    }
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double macro_f1(const ConfusionCounts& m) {
    if (m.classes == 0 || m.total() == 0)
        throw std::invalid_argument("empty confusion counts");
    double sum = 0.0;
    for (std::size_t c = 0; c < m.classes; ++c) {
        std::uint64_t diag = m.at(c, c);
        std::uint64_t row = 0, col = 0;
        for (std::size_t k = 0; k < m.classes; ++k) {
            row += m.at(c, k);
            col += m.at(k, c);
        }
        std::uint64_t denom = 2 * diag + (row - diag) + (col - diag);
        if (denom > 0) sum += 2.0 * static_cast<double>(diag) / static_cast<double>(denom);
    }
    return sum / static_cast<double>(m.classes);
}

DistanceStats distance_stats(const FinalEmbedding& emb, std::span<const Edge> edges) {
    if (edges.empty())
        throw std::invalid_argument("distance statistics need at least one edge");
    double sum[2] = {0.0, 0.0}, sum_sq[2] = {0.0, 0.0};
    std::uint64_t n[2] = {0, 0};
    for (const Edge& e : edges) {
        auto a = emb.row(e.src);
        auto b = emb.row(e.dst);
        double d = std::sqrt(kern::sqdist(a.data(), b.data(), emb.dim));
        int side = e.weight > 0 ? 0 : 1;
        sum[side] += d;
        sum_sq[side] += d * d;
        ++n[side];
    }
    auto finish = [](double s, double sq, std::uint64_t c, double& mean, double& sd) {
        if (c == 0) return;
        mean = s / static_cast<double>(c);
        double var = sq / static_cast<double>(c) - mean * mean;
        sd = std::sqrt(std::max(var, 0.0));
    };
    DistanceStats st;
    st.count_pos = n[0];
    st.count_neg = n[1];
    finish(sum[0], sum_sq[0], n[0], st.mean_pos, st.sd_pos);
    finish(sum[1], sum_sq[1], n[1], st.mean_neg, st.sd_neg);
    if (n[0] > 0 && n[1] > 0 && st.mean_neg > 0.0) st.ratio = st.mean_pos / st.mean_neg;
    return st;
}

SignedGraph two_community_graph(std::uint64_t seed, bool directed) {
    constexpr std::size_t kNodes = 200;
    constexpr std::size_t kHalf = kNodes / 2;
    constexpr double kIntra = 8.0 / static_cast<double>(kHalf - 1);
    constexpr double kInter = 4.0 / static_cast<double>(kHalf);

    auto topo_rng = make_rng(seed, "two-community");
    auto orient_rng = make_rng(seed, "two-community-orient");
    std::vector<Edge> edges;
    for (NodeId u = 0; u < kNodes; ++u) {
        for (NodeId v = u + 1; v < kNodes; ++v) {
            bool same = (u < kHalf) == (v < kHalf);
            if (uniform01(topo_rng) >= (same ? kIntra : kInter)) continue;
            NodeId a = u, b = v;
            if (directed && coin_flip(orient_rng)) std::swap(a, b);
            edges.push_back({a, b, same ? +1 : -1});
        }
    }
    return SignedGraph::from_edges(kNodes, directed, std::move(edges));
}

NodeLabels two_community_labels() {
    NodeLabels labels;
    for (NodeId v = 0; v < 200; ++v) labels[v] = v < 100 ? 0 : 1;
    return labels;
}

namespace {

std::string format_fixed(double value, int precision) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

std::string format_short(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_results_csv(std::span<const ExperimentRow> rows, std::ostream& out) {
    out << "experiment,mode,operator,repeat,micro_f1,macro_f1,ratio\n";
    for (const ExperimentRow& r : rows) {
        out << r.experiment << ',' << r.mode << ',' << r.op << ',';
        if (r.repeat < 0) out << "mean";
        else out << r.repeat;
        out << ',' << format_fixed(r.micro, 4) << ',' << format_fixed(r.macro, 4) << ',';
        if (r.ratio) out << format_fixed(*r.ratio, 4);
        out << '\n';
    }
    if (!out) throw std::runtime_error("I/O error while writing results");
}

namespace {

const char* mode_name(SampleMode m) {
    return m == SampleMode::targeted ? "targeted" : "ns";
}

struct EmbedOutcome {
    FinalEmbedding emb;
    TrainStats stats;
};

EmbedOutcome embed_graph(const SignedGraph& g, const TrainConfig& tc, const WalkConfig& wc) {
    NodeCache cache;
    const NodeCache* cache_ptr = nullptr;
    if (tc.mode == SampleMode::targeted) {
        cache = build_cache(g, wc);
        cache_ptr = &cache;
    }
    TrainResult result = train(g, cache_ptr, tc);
    return {final_embedding(result.embedding, tc.directed), result.stats};
}

std::vector<int> distinct_labels(const NodeLabels& labels) {
    std::vector<int> classes;
    classes.reserve(labels.size());
    for (const auto& [node, label] : labels) classes.push_back(label);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return classes;
}

// Fits on `train`, scores on `test`; labels indexed against `classes`.
std::pair<double, double> fit_and_score(const FinalEmbedding& emb,
                                        std::span<const std::pair<NodeId, int>> train,
                                        std::span<const std::pair<NodeId, int>> test,
                                        std::span<const int> classes,
                                        const LogRegOptions& opt) {
    const std::size_t dim = emb.dim;
    std::vector<double> x;
    x.reserve(train.size() * dim);
    std::vector<int> y;
    y.reserve(train.size());
    for (const auto& [node, label] : train) {
        auto row = emb.row(node);
        x.insert(x.end(), row.begin(), row.end());
        y.push_back(label);
    }
    MulticlassLogReg clf = train_multiclass_logreg(x, dim, y, opt);

    std::vector<int> truth, predicted;
    truth.reserve(test.size());
    predicted.reserve(test.size());
    for (const auto& [node, label] : test) {
        truth.push_back(label);
        predicted.push_back(clf.predict(emb.row(node)));
    }
    ConfusionCounts counts = make_confusion(truth, predicted, classes);
    return {micro_f1(counts), macro_f1(counts)};
}

ExperimentRow mean_row(std::span<const ExperimentRow> rows) {
    ExperimentRow mean = rows.front();
    mean.repeat = -1;
    mean.micro = 0.0;
    mean.macro = 0.0;
    double ratio_sum = 0.0;
    bool all_ratios = true;
    for (const ExperimentRow& r : rows) {
        mean.micro += r.micro;
        mean.macro += r.macro;
        if (r.ratio) ratio_sum += *r.ratio;
        else all_ratios = false;
    }
    const auto n = static_cast<double>(rows.size());
    mean.micro /= n;
    mean.macro /= n;
    if (all_ratios) mean.ratio = ratio_sum / n;
    else mean.ratio.reset();
    return mean;
}

bool isolated_in(const SignedGraph& g, NodeId v) {
    if (g.out_degree(v) > 0) return false;
    return !g.directed() || g.in_neighbors(v).empty();
}

}  // namespace

EdgeSignOutcome edge_sign_experiment(const SignedGraph& g, const ExperimentConfig& cfg,
                                     EdgeFeatureOp op) {
    if (g.positive_edge_count() == 0 || g.negative_edge_count() == 0)
        throw std::invalid_argument("edge sign prediction needs both edge signs");
    if (cfg.repeats == 0) throw std::invalid_argument("need at least one repeat");

    static const int kSignClasses[2] = {0, 1};
    EdgeSignOutcome outcome;
    double isolated_sum = 0.0;

    for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
        EdgeSplit split = split_edges(g, 0.5, derive_seed(cfg.seed, "edge-split", rep));

        TrainConfig tc = cfg.train;
        tc.directed = g.directed();
        tc.seed = derive_seed(cfg.seed, "edge-train", rep);
        WalkConfig wc = cfg.walks;
        wc.seed = derive_seed(cfg.seed, "edge-walks", rep);
        auto [emb, stats] = embed_graph(split.train, tc, wc);

        const std::size_t dim = op == EdgeFeatureOp::concat ? 2 * emb.dim : emb.dim;
        std::vector<double> x;
        x.reserve(split.train.edges().size() * dim);
        std::vector<int> y;
        y.reserve(split.train.edges().size());
        for (const Edge& e : split.train.edges()) {
            std::vector<double> f = edge_features(emb.row(e.src), emb.row(e.dst), op);
            x.insert(x.end(), f.begin(), f.end());
            y.push_back(e.weight > 0 ? 1 : 0);
        }
        LogRegOptions opt = cfg.logreg;
        opt.seed = derive_seed(cfg.seed, "edge-logreg", rep);
        LogRegModel model = train_logreg(x, dim, y, opt);

        std::vector<int> truth, predicted;
        truth.reserve(split.test.size());
        predicted.reserve(split.test.size());
        std::size_t isolated = 0;
        for (const Edge& e : split.test) {
            std::vector<double> f = edge_features(emb.row(e.src), emb.row(e.dst), op);
            truth.push_back(e.weight > 0 ? 1 : 0);
            predicted.push_back(model.predict(f));
            if (isolated_in(split.train, e.src) || isolated_in(split.train, e.dst)) ++isolated;
        }
        ConfusionCounts counts = make_confusion(truth, predicted, kSignClasses);
        isolated_sum += split.test.empty()
                            ? 0.0
                            : static_cast<double>(isolated) / static_cast<double>(split.test.size());

        auto test_neg = static_cast<double>(std::count_if(
            split.test.begin(), split.test.end(), [](const Edge& e) { return e.weight < 0; }));
        outcome.split_negative_fractions.emplace_back(
            static_cast<double>(split.train.negative_edge_count()) /
                static_cast<double>(split.train.edges().size()),
            split.test.empty() ? 0.0 : test_neg / static_cast<double>(split.test.size()));

        ExperimentRow row;
        row.experiment = "edge-sign";
        row.mode = mode_name(tc.mode);
        row.op = to_string(op);
        row.repeat = static_cast<int>(rep);
        row.micro = micro_f1(counts);
        row.macro = macro_f1(counts);
        row.ratio = distance_stats(emb, g.edges()).ratio;
        outcome.rows.push_back(std::move(row));
    }

    outcome.isolated_edge_fraction = isolated_sum / static_cast<double>(cfg.repeats);
    outcome.rows.push_back(mean_row(outcome.rows));
    return outcome;
}

std::vector<ExperimentRow> node_label_experiment(const SignedGraph& g, const NodeLabels& labels,
                                                 const ExperimentConfig& cfg) {
    std::vector<int> classes = distinct_labels(labels);
    if (classes.size() < 2)
        throw std::invalid_argument("node label prediction needs at least two classes");
    if (cfg.repeats == 0) throw std::invalid_argument("need at least one repeat");

    std::vector<std::pair<NodeId, int>> labeled(labels.begin(), labels.end());
    if (labeled.size() < 2) throw std::invalid_argument("need at least two labeled nodes");

    std::vector<ExperimentRow> rows;
    for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
        TrainConfig tc = cfg.train;
        tc.directed = g.directed();
        tc.seed = derive_seed(cfg.seed, "node-train", rep);
        WalkConfig wc = cfg.walks;
        wc.seed = derive_seed(cfg.seed, "node-walks", rep);
        auto [emb, stats] = embed_graph(g, tc, wc);

        std::vector<std::pair<NodeId, int>> order = labeled;
        auto rng = make_rng(cfg.seed, "node-split", rep);
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            auto j = static_cast<std::size_t>(uniform_below(rng, i + 1));
            std::swap(order[i], order[j]);
        }
        std::size_t train_count =
            std::clamp<std::size_t>(order.size() / 2, 1, order.size() - 1);
        std::span<const std::pair<NodeId, int>> train_set(order.data(), train_count);
        std::span<const std::pair<NodeId, int>> test_set(order.data() + train_count,
                                                         order.size() - train_count);

        LogRegOptions opt = cfg.logreg;
        opt.seed = derive_seed(cfg.seed, "node-logreg", rep);
        auto [micro, macro] = fit_and_score(emb, train_set, test_set, classes, opt);

        ExperimentRow row;
        row.experiment = "node-label";
        row.mode = mode_name(tc.mode);
        row.op = "-";
        row.repeat = static_cast<int>(rep);
        row.micro = micro;
        row.macro = macro;
        row.ratio = distance_stats(emb, g.edges()).ratio;
        rows.push_back(std::move(row));
    }
    rows.push_back(mean_row(rows));
    return rows;
}

std::vector<ExperimentRow> partial_info_experiment(const SignedGraph& g,
                                                   const NodeLabels& labels,
                                                   const ExperimentConfig& cfg,
                                                   std::span<const double> fractions) {
    if (!g.directed())
        throw std::invalid_argument("partial-information runs need a directed graph");
    std::vector<int> classes = distinct_labels(labels);
    if (classes.size() < 2)
        throw std::invalid_argument("node label prediction needs at least two classes");
    if (fractions.empty()) throw std::invalid_argument("need at least one fraction");
    for (double f : fractions)
        if (!(f >= 0.0 && f < 1.0))
            throw std::invalid_argument("fractions must lie in [0, 1)");

    std::vector<std::pair<NodeId, int>> labeled(labels.begin(), labels.end());
    std::vector<ExperimentRow> rows;

    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        const double fraction = fractions[fi];

        // The split is fixed before the mode loop so both modes see the same
        // test nodes.
        std::vector<std::pair<NodeId, int>> train_set, test_set;
        std::optional<OutgoingRemoval> removal;
        if (fraction == 0.0) {
            std::vector<std::pair<NodeId, int>> order = labeled;
            auto rng = make_rng(cfg.seed, "partial-split", fi);
            for (std::size_t i = order.size() - 1; i > 0; --i) {
                auto j = static_cast<std::size_t>(uniform_below(rng, i + 1));
                std::swap(order[i], order[j]);
            }
            std::size_t train_count =
                std::clamp<std::size_t>(order.size() / 2, 1, order.size() - 1);
            train_set.assign(order.begin(), order.begin() + train_count);
            test_set.assign(order.begin() + train_count, order.end());
        } else {
            removal = remove_outgoing(g, fraction, derive_seed(cfg.seed, "partial-remove", fi));
            const auto& test_nodes = removal->test_nodes;
            for (const auto& [node, label] : labeled) {
                bool is_test = std::binary_search(test_nodes.begin(), test_nodes.end(), node);
                (is_test ? test_set : train_set).emplace_back(node, label);
            }
            if (train_set.empty() || test_set.empty())
                throw std::runtime_error("fraction leaves no labeled train or test nodes");
        }

        for (SampleMode mode : {SampleMode::targeted, SampleMode::negative_sampling}) {
            TrainConfig tc = cfg.train;
            tc.mode = mode;
            tc.directed = true;
            tc.seed = derive_seed(cfg.seed, "partial-train", fi);
            WalkConfig wc = cfg.walks;
            wc.seed = derive_seed(cfg.seed, "partial-walks", fi);

            const SignedGraph& used = removal ? removal->reduced : g;
            auto [emb, stats] = embed_graph(used, tc, wc);

            LogRegOptions opt = cfg.logreg;
            opt.seed = derive_seed(cfg.seed, "partial-logreg", fi);
            auto [micro, macro] = fit_and_score(emb, train_set, test_set, classes, opt);

            ExperimentRow row;
            row.experiment = "partial-info:" + format_short(fraction);
            row.mode = mode_name(mode);
            row.op = "-";
            row.repeat = 0;
            row.micro = micro;
            row.macro = macro;
            row.ratio = distance_stats(emb, g.edges()).ratio;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace signet
