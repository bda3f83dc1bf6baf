#include "signet/trainer.hpp"

#include "signet/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <thread>

namespace signet {

double sigmoid(double a) {
    a = std::clamp(a, -6.0, 6.0);
    return 1.0 / (1.0 + std::exp(-a));
}

double sigmoid_unclamped(double a) { return 1.0 / (1.0 + std::exp(-a)); }

double log_sigmoid_unclamped(double a) {
    // -log1p(e^-a) for a >= 0, a - log1p(e^a) below: stable at both tails
    if (a >= 0.0) return -std::log1p(std::exp(-a));
    return a - std::log1p(std::exp(a));
}

SigmoidTable::SigmoidTable() {
    for (std::size_t k = 0; k <= kBins; ++k) {
        double a = -kBound + static_cast<double>(k) * (2 * kBound / static_cast<double>(kBins));
        sig_[k] = sigmoid_unclamped(a);
        log_[k] = std::log(sig_[k]);
    }
}

double pair_score(std::span<const double> x_i, std::span<const double> c_j, int s) {
    if (x_i.size() != c_j.size())
        throw std::invalid_argument("pair score needs equal dimensions");
    return sigmoid(static_cast<double>(s) * kern::dot(c_j.data(), x_i.data(), x_i.size()));
}

bool EmbeddingMatrix::all_finite() const {
    auto ok = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
    };
    return ok(x_) && ok(ctx_);
}

namespace {

void validate_config(const SignedGraph& g, const TrainConfig& cfg) {
    if (cfg.dimension < 1) throw std::invalid_argument("dimension must be positive");
    if (cfg.directed != g.directed())
        throw std::invalid_argument("config directedness does not match the graph");
    if (cfg.directed && cfg.dimension % 2 != 0)
        throw std::invalid_argument("directed mode needs an even dimension");
    if (cfg.total_samples < 1) throw std::invalid_argument("sample budget must be positive");
    if (cfg.negatives_per_edge < 1)
        throw std::invalid_argument("per-edge sample count must be positive");
    if (!(cfg.initial_step > 0.0)) throw std::invalid_argument("step size must be positive");
    if (cfg.threads < 1) throw std::invalid_argument("thread count must be positive");
}

std::size_t vector_width(const TrainConfig& cfg) {
    return cfg.directed ? cfg.dimension / 2 : cfg.dimension;
}

}  // namespace

EmbeddingMatrix init_embeddings(const SignedGraph& g, const TrainConfig& cfg, Rng& rng) {
    validate_config(g, cfg);
    const std::size_t d = vector_width(cfg);
    EmbeddingMatrix emb(g.node_count(), d, cfg.directed);
    const double scale = 1.0 / static_cast<double>(d);
    for (NodeId v = 0; v < g.node_count(); ++v) {
        double* row = emb.x(v);
        for (std::size_t k = 0; k < d; ++k) row[k] = (uniform01(rng) - 0.5) * scale;
    }
    return emb;
}

double edge_update(EmbeddingMatrix& emb, const Edge& e, std::span<const TargetedDraw> samples,
                   double rho, const SigmoidTable* lut) {
    const std::size_t d = emb.dim();
    double* xi = emb.x(e.src);

    thread_local std::vector<double> delta;
    delta.assign(d, 0.0);

    double objective = 0.0;
    auto ascend = [&](NodeId partner, int t) {
        double* c = emb.context(partner);
        double a = static_cast<double>(t) * kern::dot(c, xi, d);
        double sig, log_sig;
        if (lut) {
            sig = lut->value(a);
            log_sig = lut->log_value(a);
        } else {
            sig = sigmoid_unclamped(a);
            log_sig = log_sigmoid_unclamped(a);
        }
        objective += log_sig;
        const double coef = rho * static_cast<double>(t) * (1.0 - sig);
        kern::axpy(coef, c, delta.data(), d);  // uses c before it moves
        kern::axpy(coef, xi, c, d);
    };

    ascend(e.dst, e.weight > 0 ? +1 : -1);
    for (const TargetedDraw& s : samples) ascend(s.node, s.sign);
    kern::axpy(1.0, delta.data(), xi, d);

    if (!std::isfinite(objective))
        throw std::runtime_error("training diverged: non-finite objective");
    return objective;
}

double step_size(double rho0, std::uint64_t t, std::uint64_t total) {
    double frac = 1.0 - static_cast<double>(t) / static_cast<double>(total);
    return rho0 * std::max(frac, 1e-4);
}

FinalEmbedding final_embedding(const EmbeddingMatrix& emb, bool directed) {
    if (directed != emb.directed())
        throw std::invalid_argument("directedness does not match the trained matrix");
    FinalEmbedding out;
    const std::size_t d = emb.dim();
    out.dim = directed ? 2 * d : d;
    out.data.resize(emb.node_count() * out.dim);
    for (NodeId v = 0; v < emb.node_count(); ++v) {
        double* row = out.data.data() + static_cast<std::size_t>(v) * out.dim;
        std::copy_n(emb.x(v), d, row);
        if (directed) std::copy_n(emb.context(v), d, row + d);
    }
    return out;
}

namespace {

struct WorkerTally {
    double early_sum = 0.0;
    std::uint64_t early_n = 0;
    double late_sum = 0.0;
    std::uint64_t late_n = 0;
    std::uint64_t fallbacks = 0;
};

struct TrainJob {
    const SignedGraph& g;
    const NodeCache* cache;
    const TrainConfig& cfg;
    const AliasTable& alias;
    const SigmoidTable& lut;
    EmbeddingMatrix& emb;
    std::atomic<std::uint64_t>& progress;
};

// kRhoBatch iterations share one step size in multi-worker runs; a single
// worker recomputes it exactly every iteration.
constexpr std::uint64_t kRhoBatch = 1024;

void train_worker(const TrainJob& job, std::size_t worker, std::uint64_t share,
                  WorkerTally& tally) {
    const TrainConfig& cfg = job.cfg;
    const bool exact_rho = cfg.threads == 1;
    auto rng = make_rng(cfg.seed, "train", worker);
    std::vector<TargetedDraw> draws;
    draws.reserve(cfg.negatives_per_edge);

    const std::uint64_t window = std::max<std::uint64_t>(share / 10, 1);
    double rho = cfg.initial_step;

    for (std::uint64_t t = 0; t < share; ++t) {
        if (exact_rho) {
            rho = step_size(cfg.initial_step, t, share);
        } else if (t % kRhoBatch == 0) {
            std::uint64_t global =
                job.progress.fetch_add(std::min(kRhoBatch, share - t), std::memory_order_relaxed);
            rho = step_size(cfg.initial_step, global, cfg.total_samples);
        }

        Edge e = draw_edge(job.g, job.alias, rng);
        if (!cfg.directed && coin_flip(rng)) std::swap(e.src, e.dst);
        const int s = e.weight > 0 ? +1 : -1;

        draws.clear();
        if (cfg.mode == SampleMode::targeted) {
            sample_targeted(*job.cache, job.g, e.src, s, cfg.negatives_per_edge, rng, draws);
            for (const TargetedDraw& dr : draws) tally.fallbacks += dr.fallback ? 1 : 0;
        } else {
            sample_noise(job.g, e.src, s, cfg.negatives_per_edge, rng, draws);
        }

        double obj = edge_update(job.emb, e, draws, rho, &job.lut);
        if (t < window) {
            tally.early_sum += obj;
            ++tally.early_n;
        }
        if (t >= share - window) {
            tally.late_sum += obj;
            ++tally.late_n;
        }
    }
}

}  // namespace

TrainResult train(const SignedGraph& g, const NodeCache* cache, const TrainConfig& cfg) {
    validate_config(g, cfg);
    if (g.edges().empty()) throw std::invalid_argument("cannot train on a graph with no edges");
    if (cfg.mode == SampleMode::targeted) {
        if (cache == nullptr)
            throw std::invalid_argument("targeted mode needs a node cache");
        if (cache->node_count() != g.node_count())
            throw std::invalid_argument("node cache does not match the graph");
    }

    const AliasTable alias = build_edge_alias(g);
    auto init_rng = make_rng(cfg.seed, "init");
    EmbeddingMatrix emb = init_embeddings(g, cfg, init_rng);
    const SigmoidTable lut;
    std::atomic<std::uint64_t> progress{0};
    TrainJob job{g, cache, cfg, alias, lut, emb, progress};

    const std::size_t workers =
        static_cast<std::size_t>(std::min<std::uint64_t>(cfg.threads, cfg.total_samples));
    std::vector<WorkerTally> tallies(workers);

    const auto t0 = std::chrono::steady_clock::now();
    if (workers == 1) {
        train_worker(job, 0, cfg.total_samples, tallies[0]);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            std::uint64_t share = cfg.total_samples / workers +
                                  (w < cfg.total_samples % workers ? 1 : 0);
            pool.emplace_back([&, w, share] {
                try {
                    train_worker(job, w, share, tallies[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }
    const auto t1 = std::chrono::steady_clock::now();

    if (!emb.all_finite())
        throw std::runtime_error("training diverged: non-finite parameters");

    TrainStats stats;
    stats.iterations = cfg.total_samples;
    stats.optimize_seconds = std::chrono::duration<double>(t1 - t0).count();
    double early_sum = 0.0, late_sum = 0.0;
    std::uint64_t early_n = 0, late_n = 0;
    for (const WorkerTally& t : tallies) {
        early_sum += t.early_sum;
        early_n += t.early_n;
        late_sum += t.late_sum;
        late_n += t.late_n;
        stats.fallback_draws += t.fallbacks;
    }
    stats.early_objective = early_n ? early_sum / static_cast<double>(early_n) : 0.0;
    stats.late_objective = late_n ? late_sum / static_cast<double>(late_n) : 0.0;
    return {std::move(emb), stats};
}

namespace {

void write_fixed(std::ostream& out, double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, 6);
    out.write(buf, res.ptr - buf);
}

}  // namespace

void save_embedding(const FinalEmbedding& emb, const SignedGraph& g, std::ostream& out) {
    if (emb.node_count() != g.node_count())
        throw std::invalid_argument("embedding and graph node counts differ");
    out << emb.node_count() << ' ' << emb.dim << '\n';
    for (NodeId v = 0; v < emb.node_count(); ++v) {
        out << g.external_id(v);
        for (double value : emb.row(v)) {
            out.put(' ');
            write_fixed(out, value);
        }
        out.put('\n');
    }
    if (!out) throw std::runtime_error("I/O error while writing embedding");
}

void save_embedding_file(const FinalEmbedding& emb, const SignedGraph& g,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    save_embedding(emb, g, out);
}

FinalEmbedding load_embedding(std::istream& in, const SignedGraph& g) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line)) throw std::runtime_error("embedding file truncated");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };

    next_line();
    std::size_t nodes = 0, dim = 0;
    {
        std::istringstream header(line);
        if (!(header >> nodes >> dim) || dim == 0)
            throw std::runtime_error("line 1: expected 'node_count dim' header");
    }
    if (nodes != g.node_count())
        throw std::runtime_error("embedding node count does not match the graph");

    FinalEmbedding emb;
    emb.dim = dim;
    emb.data.assign(nodes * dim, 0.0);
    std::vector<char> seen(nodes, 0);

    for (std::size_t row = 0; row < nodes; ++row) {
        next_line();
        const char* p = line.data();
        const char* end = line.data() + line.size();
        auto skip_ws = [&] {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
        };
        skip_ws();
        std::int64_t ext = 0;
        auto idres = std::from_chars(p, end, ext);
        if (idres.ec != std::errc{})
            throw std::runtime_error("line " + std::to_string(line_no) + ": bad node id");
        p = idres.ptr;
        NodeId v;
        try {
            v = g.internal_id(ext);
        } catch (const std::out_of_range&) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": unknown node id " +
                                     std::to_string(ext));
        }
        if (seen[v])
            throw std::runtime_error("line " + std::to_string(line_no) + ": duplicate node id " +
                                     std::to_string(ext));
        seen[v] = 1;
        double* dst = emb.data.data() + static_cast<std::size_t>(v) * dim;
        for (std::size_t k = 0; k < dim; ++k) {
            skip_ws();
            auto res = std::from_chars(p, end, dst[k]);
            if (res.ec != std::errc{})
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": expected " + std::to_string(dim) + " coordinates");
            p = res.ptr;
        }
        skip_ws();
        if (p != end)
            throw std::runtime_error("line " + std::to_string(line_no) + ": trailing data");
    }
    return emb;
}

FinalEmbedding load_embedding_file(const std::string& path, const SignedGraph& g) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_embedding(in, g);
}

}  // namespace signet
