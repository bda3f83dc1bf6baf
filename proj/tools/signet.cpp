#include "signet/eval.hpp"
#include "signet/graph.hpp"
#include "signet/sampler.hpp"
#include "signet/trainer.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace signet;

std::string fmt(double value, int precision = 3) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

struct DirectionFlags {
    bool directed = false;
    bool undirected = false;
};

void add_direction(CLI::App* cmd, DirectionFlags& d) {
    auto* od = cmd->add_flag("--directed", d.directed, "treat edges as directed");
    auto* ou = cmd->add_flag("--undirected", d.undirected, "treat edges as undirected");
    od->excludes(ou);
    ou->excludes(od);
}

bool resolve_direction(const DirectionFlags& d) {
    if (d.directed == d.undirected)
        throw CLI::ValidationError("pass exactly one of --directed / --undirected");
    return d.directed;
}

struct TrainFlags {
    std::size_t dim = 40;
    std::uint64_t samples = 100'000'000;
    std::size_t neg_samples = 5;
    std::size_t walk_len = 50;
    std::size_t walks_per_node = 1;
    std::string mode = "targeted";
    double lr = 0.025;
    std::size_t threads = 1;
    std::uint64_t seed = 1;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_walks = true) {
    cmd->add_option("--dim", f.dim, "embedding dimension K")->capture_default_str();
    cmd->add_option("--samples", f.samples, "total edge samples T")->capture_default_str();
    cmd->add_option("--neg-samples", f.neg_samples, "partner draws per edge N")
        ->capture_default_str();
    if (with_walks) {
        cmd->add_option("--walk-len", f.walk_len, "walk length l")->capture_default_str();
        cmd->add_option("--walks-per-node", f.walks_per_node, "walks per node r")
            ->capture_default_str();
    }
    cmd->add_option("--mode", f.mode, "sampling mode")
        ->check(CLI::IsMember({"targeted", "ns"}))
        ->capture_default_str();
    cmd->add_option("--lr", f.lr, "initial step size")->capture_default_str();
    cmd->add_option("--threads", f.threads, "worker threads")->capture_default_str();
    cmd->add_option("--seed", f.seed, "root RNG seed")->capture_default_str();
}

void validate_train_flags(const TrainFlags& f, bool directed) {
    if (f.dim == 0) throw CLI::ValidationError("--dim must be positive");
    if (directed && f.dim % 2 != 0)
        throw CLI::ValidationError("--dim must be even with --directed");
    if (f.samples == 0) throw CLI::ValidationError("--samples must be positive");
    if (f.neg_samples == 0) throw CLI::ValidationError("--neg-samples must be positive");
    if (f.walk_len < 2) throw CLI::ValidationError("--walk-len must be at least 2");
    if (f.walks_per_node == 0) throw CLI::ValidationError("--walks-per-node must be positive");
    if (!(f.lr > 0.0)) throw CLI::ValidationError("--lr must be positive");
    if (f.threads == 0) throw CLI::ValidationError("--threads must be positive");
}

TrainConfig to_train_config(const TrainFlags& f, bool directed) {
    TrainConfig tc;
    tc.dimension = f.dim;
    tc.total_samples = f.samples;
    tc.negatives_per_edge = f.neg_samples;
    tc.initial_step = f.lr;
    tc.mode = f.mode == "ns" ? SampleMode::negative_sampling : SampleMode::targeted;
    tc.directed = directed;
    tc.threads = f.threads;
    tc.seed = f.seed;
    return tc;
}

WalkConfig to_walk_config(const TrainFlags& f) {
    WalkConfig wc;
    wc.walk_length = f.walk_len;
    wc.walks_per_node = f.walks_per_node;
    wc.seed = f.seed;
    wc.threads = f.threads;
    return wc;
}

void write_rows(const std::vector<ExperimentRow>& rows, const std::string& out_path) {
    if (out_path.empty()) {
        write_results_csv(rows, std::cout);
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    write_results_csv(rows, out);
}

void run_train(const std::string& input, const std::string& out, const DirectionFlags& dir,
               const TrainFlags& flags) {
    const bool directed = resolve_direction(dir);
    validate_train_flags(flags, directed);

    SignedGraph g = load_edge_list_file(input, directed);
    TrainConfig tc = to_train_config(flags, directed);

    NodeCache cache;
    const NodeCache* cache_ptr = nullptr;
    double sampling_seconds = 0.0;
    if (tc.mode == SampleMode::targeted) {
        auto t0 = std::chrono::steady_clock::now();
        cache = build_cache(g, to_walk_config(flags));
        auto t1 = std::chrono::steady_clock::now();
        sampling_seconds = std::chrono::duration<double>(t1 - t0).count();
        cache_ptr = &cache;
    }

    TrainResult result = train(g, cache_ptr, tc);
    FinalEmbedding emb = final_embedding(result.embedding, directed);
    save_embedding_file(emb, g, out);

    std::cout << "nodes: " << g.node_count() << "  edges: " << g.edges().size() << '\n';
    if (tc.mode == SampleMode::targeted)
        std::cout << "cache conflicts resolved: " << cache.conflict_count << '\n';
    std::cout << "sampling time: " << fmt(sampling_seconds) << " s\n"
              << "optimization time: " << fmt(result.stats.optimize_seconds) << " s\n"
              << "objective (first 10% -> last 10%): " << fmt(result.stats.early_objective, 4)
              << " -> " << fmt(result.stats.late_objective, 4) << '\n';
    if (tc.mode == SampleMode::targeted) {
        auto total = static_cast<double>(result.stats.iterations) *
                     static_cast<double>(tc.negatives_per_edge);
        std::cout << "empty-cache fallback draws: " << result.stats.fallback_draws << " ("
                  << fmt(100.0 * static_cast<double>(result.stats.fallback_draws) / total)
                  << "% of " << static_cast<std::uint64_t>(total) << ")\n";
    }
    std::cout << "wrote " << out << '\n';
}

void run_gen(std::size_t nodes, double avg_degree, double neg, std::uint64_t seed, bool directed,
             const std::string& out) {
    if (nodes < 2) throw CLI::ValidationError("--nodes must be at least 2");
    if (!(avg_degree >= 0.0) || avg_degree > static_cast<double>(nodes - 1))
        throw CLI::ValidationError("--avg-degree must be in [0, nodes-1]");
    if (!(neg >= 0.0 && neg <= 1.0)) throw CLI::ValidationError("--neg must be in [0, 1]");

    SignedGraph g = generate_er_signed(nodes, avg_degree, neg, seed, directed);
    save_edge_list_file(g, out);
    double realized = g.edges().empty()
                          ? 0.0
                          : static_cast<double>(g.negative_edge_count()) /
                                static_cast<double>(g.edges().size());
    std::cout << "nodes: " << g.node_count() << "  edges: " << g.edges().size()
              << "  negative fraction: " << fmt(realized) << '\n'
              << "wrote " << out << '\n';
}

void run_stats(const std::string& input, const DirectionFlags& dir,
               const std::string& embedding_path) {
    const bool directed = resolve_direction(dir);
    SignedGraph g = load_edge_list_file(input, directed);
    const auto m = static_cast<double>(g.edges().size());
    std::cout << "nodes: " << g.node_count() << '\n'
              << "edges: " << g.edges().size() << '\n'
              << "negative edges: " << g.negative_edge_count() << " ("
              << fmt(m > 0 ? 100.0 * static_cast<double>(g.negative_edge_count()) / m : 0.0)
              << "%)\n";
    if (embedding_path.empty()) return;

    FinalEmbedding emb = load_embedding_file(embedding_path, g);
    DistanceStats st = distance_stats(emb, g.edges());
    std::cout << "positive edges: mean distance " << fmt(st.mean_pos, 4) << " (sd "
              << fmt(st.sd_pos, 4) << ", n=" << st.count_pos << ")\n"
              << "negative edges: mean distance " << fmt(st.mean_neg, 4) << " (sd "
              << fmt(st.sd_neg, 4) << ", n=" << st.count_neg << ")\n";
    if (st.ratio) std::cout << "ratio (pos/neg): " << fmt(*st.ratio, 4) << '\n';
    else std::cout << "ratio (pos/neg): absent\n";
}

ExperimentConfig make_experiment_config(const TrainFlags& flags, bool directed,
                                        std::size_t repeats) {
    ExperimentConfig cfg;
    cfg.train = to_train_config(flags, directed);
    cfg.walks = to_walk_config(flags);
    cfg.repeats = repeats;
    cfg.seed = flags.seed;
    return cfg;
}

void run_eval_edges(const std::string& input, const std::string& out, const DirectionFlags& dir,
                    const TrainFlags& flags, const std::string& op_name, std::size_t repeats) {
    const bool directed = resolve_direction(dir);
    validate_train_flags(flags, directed);
    auto op = parse_feature_op(op_name);
    if (!op) throw CLI::ValidationError("unknown --op " + op_name);
    if (repeats == 0) throw CLI::ValidationError("--repeats must be positive");

    SignedGraph g = load_edge_list_file(input, directed);
    EdgeSignOutcome outcome = edge_sign_experiment(g, make_experiment_config(flags, directed, repeats), *op);
    write_rows(outcome.rows, out);

    const ExperimentRow& mean = outcome.rows.back();
    std::cout << "edge-sign (" << mean.mode << ", " << mean.op << "): mean micro F1 "
              << fmt(mean.micro, 4) << ", mean macro F1 " << fmt(mean.macro, 4) << '\n'
              << "test edges with an isolated endpoint: "
              << fmt(100.0 * outcome.isolated_edge_fraction) << "%\n";
    std::cout << "realized negative fraction per repeat (train/test):";
    for (const auto& [tr, te] : outcome.split_negative_fractions)
        std::cout << ' ' << fmt(tr) << '/' << fmt(te);
    std::cout << "\nsplits: uniform over edges, not sign-stratified\n"
              << "ns-mode noise distribution: uniform over non-neighbor nodes\n";
}

void run_eval_nodes(const std::string& input, const std::string& labels_path,
                    const std::string& out, const DirectionFlags& dir, const TrainFlags& flags,
                    std::size_t repeats) {
    const bool directed = resolve_direction(dir);
    validate_train_flags(flags, directed);
    if (repeats == 0) throw CLI::ValidationError("--repeats must be positive");

    SignedGraph g = load_edge_list_file(input, directed);
    NodeLabels labels = load_labels_file(labels_path, g);
    std::vector<ExperimentRow> rows =
        node_label_experiment(g, labels, make_experiment_config(flags, directed, repeats));
    write_rows(rows, out);

    const ExperimentRow& mean = rows.back();
    std::cout << "node-label (" << mean.mode << "): mean micro F1 " << fmt(mean.micro, 4)
              << ", mean macro F1 " << fmt(mean.macro, 4) << '\n'
              << "ns-mode noise distribution: uniform over non-neighbor nodes\n";
}

void run_partial(const std::string& input, const std::string& labels_path,
                 const std::string& out, const DirectionFlags& dir, const TrainFlags& flags,
                 const std::vector<double>& fractions) {
    if (!dir.directed)
        throw CLI::ValidationError("partial-information runs need --directed input");
    validate_train_flags(flags, true);
    if (fractions.empty()) throw CLI::ValidationError("--fractions must not be empty");
    for (double f : fractions)
        if (!(f >= 0.0 && f < 1.0))
            throw CLI::ValidationError("--fractions values must lie in [0, 1)");

    SignedGraph g = load_edge_list_file(input, true);
    NodeLabels labels = load_labels_file(labels_path, g);
    std::vector<ExperimentRow> rows = partial_info_experiment(
        g, labels, make_experiment_config(flags, true, 1), fractions);
    write_rows(rows, out);

    for (std::size_t k = 0; k + 1 < rows.size(); k += 2)
        std::cout << rows[k].experiment << ": targeted micro F1 " << fmt(rows[k].micro, 4)
                  << " vs ns " << fmt(rows[k + 1].micro, 4) << '\n';
    std::cout << "ns-mode noise distribution: uniform over non-neighbor nodes\n";
}

void run_dump_cache(const std::string& input, const std::string& out, const DirectionFlags& dir,
                    const TrainFlags& flags) {
    const bool directed = resolve_direction(dir);
    if (flags.walk_len < 2) throw CLI::ValidationError("--walk-len must be at least 2");
    if (flags.walks_per_node == 0)
        throw CLI::ValidationError("--walks-per-node must be positive");

    SignedGraph g = load_edge_list_file(input, directed);
    NodeCache cache = build_cache(g, to_walk_config(flags));
    if (out.empty()) {
        dump_cache(cache, g, std::cout);
        return;
    }
    std::ofstream file(out);
    if (!file) throw std::runtime_error("cannot open " + out);
    dump_cache(cache, g, file);
    std::cout << "conflicts resolved: " << cache.conflict_count << '\n'
              << "wrote " << out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"signed-network embeddings with targeted node sampling"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "learn an embedding from an edge list");
    std::string train_input, train_out;
    DirectionFlags train_dir;
    TrainFlags train_flags;
    train_cmd->add_option("--input", train_input, "edge-list file")->required();
    train_cmd->add_option("--out", train_out, "embedding output file")->required();
    add_direction(train_cmd, train_dir);
    add_train_flags(train_cmd, train_flags);
    train_cmd->callback([&] { run_train(train_input, train_out, train_dir, train_flags); });

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "generate a random signed edge list");
    std::size_t gen_nodes = 1000;
    double gen_degree = 10.0, gen_neg = 0.2;
    std::uint64_t gen_seed = 1;
    bool gen_directed = false;
    std::string gen_out;
    gen_cmd->add_option("--nodes", gen_nodes, "node count")->capture_default_str();
    gen_cmd->add_option("--avg-degree", gen_degree, "expected degree")->capture_default_str();
    gen_cmd->add_option("--neg", gen_neg, "negative-edge probability")->capture_default_str();
    gen_cmd->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen_cmd->add_flag("--directed", gen_directed, "orient each edge at random");
    gen_cmd->add_option("--out", gen_out, "edge-list output file")->required();
    gen_cmd->callback(
        [&] { run_gen(gen_nodes, gen_degree, gen_neg, gen_seed, gen_directed, gen_out); });

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "graph and embedding statistics");
    std::string stats_input, stats_emb;
    DirectionFlags stats_dir;
    stats_cmd->add_option("--input", stats_input, "edge-list file")->required();
    add_direction(stats_cmd, stats_dir);
    stats_cmd->add_option("--embedding", stats_emb, "embedding file for distance statistics");
    stats_cmd->callback([&] { run_stats(stats_input, stats_dir, stats_emb); });

    // eval-edges
    auto* ee_cmd = app.add_subcommand("eval-edges", "edge-sign prediction experiment");
    std::string ee_input, ee_out, ee_op = "hadamard";
    DirectionFlags ee_dir;
    TrainFlags ee_flags;
    std::size_t ee_repeats = 5;
    ee_cmd->add_option("--input", ee_input, "edge-list file")->required();
    ee_cmd->add_option("--out", ee_out, "results CSV (stdout when omitted)");
    add_direction(ee_cmd, ee_dir);
    add_train_flags(ee_cmd, ee_flags);
    ee_cmd->add_option("--op", ee_op, "edge feature operator")
        ->check(CLI::IsMember({"concat", "avg", "hadamard", "l1", "l2"}))
        ->capture_default_str();
    ee_cmd->add_option("--repeats", ee_repeats, "experiment repeats")->capture_default_str();
    ee_cmd->callback(
        [&] { run_eval_edges(ee_input, ee_out, ee_dir, ee_flags, ee_op, ee_repeats); });

    // eval-nodes
    auto* en_cmd = app.add_subcommand("eval-nodes", "node-label prediction experiment");
    std::string en_input, en_labels, en_out;
    DirectionFlags en_dir;
    TrainFlags en_flags;
    std::size_t en_repeats = 5;
    en_cmd->add_option("--input", en_input, "edge-list file")->required();
    en_cmd->add_option("--labels", en_labels, "node label file")->required();
    en_cmd->add_option("--out", en_out, "results CSV (stdout when omitted)");
    add_direction(en_cmd, en_dir);
    add_train_flags(en_cmd, en_flags);
    en_cmd->add_option("--repeats", en_repeats, "experiment repeats")->capture_default_str();
    en_cmd->callback(
        [&] { run_eval_nodes(en_input, en_labels, en_out, en_dir, en_flags, en_repeats); });

    // partial
    auto* pa_cmd = app.add_subcommand("partial", "partial-information ablation");
    std::string pa_input, pa_labels, pa_out;
    DirectionFlags pa_dir;
    TrainFlags pa_flags;
    std::vector<double> pa_fractions;
    pa_cmd->add_option("--input", pa_input, "edge-list file")->required();
    pa_cmd->add_option("--labels", pa_labels, "node label file")->required();
    pa_cmd->add_option("--out", pa_out, "results CSV (stdout when omitted)");
    add_direction(pa_cmd, pa_dir);
    add_train_flags(pa_cmd, pa_flags);
    pa_cmd->add_option("--fractions", pa_fractions, "test-node fractions")
        ->required()
        ->delimiter(',');
    pa_cmd->callback(
        [&] { run_partial(pa_input, pa_labels, pa_out, pa_dir, pa_flags, pa_fractions); });

    // dump-cache
    auto* dc_cmd = app.add_subcommand("dump-cache", "write the targeted-sampling cache");
    std::string dc_input, dc_out;
    DirectionFlags dc_dir;
    TrainFlags dc_flags;
    dc_cmd->add_option("--input", dc_input, "edge-list file")->required();
    dc_cmd->add_option("--out", dc_out, "cache dump file (stdout when omitted)");
    add_direction(dc_cmd, dc_dir);
    dc_cmd->add_option("--walk-len", dc_flags.walk_len, "walk length l")->capture_default_str();
    dc_cmd->add_option("--walks-per-node", dc_flags.walks_per_node, "walks per node r")
        ->capture_default_str();
    dc_cmd->add_option("--seed", dc_flags.seed, "RNG seed")->capture_default_str();
    dc_cmd->add_option("--threads", dc_flags.threads, "worker threads")->capture_default_str();
    dc_cmd->callback([&] { run_dump_cache(dc_input, dc_out, dc_dir, dc_flags); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
