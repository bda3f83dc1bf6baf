// End-to-end acceptance gate. Each criterion prints one PASS/FAIL line with
// its wall time; the process exits nonzero when any line fails. Thresholds
// are fixed here on purpose — loosening them is not a fix.

#include "signet/eval.hpp"
#include "signet/graph.hpp"
#include "signet/kernels.hpp"
#include "signet/rng.hpp"
#include "signet/sampler.hpp"
#include "signet/trainer.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace signet;
namespace fs = std::filesystem;

namespace {

#include "frozen_f1.inc"

bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

struct Harness {
    int failures = 0;

    void run(int id, const std::string& label, double budget_seconds,
             const std::function<bool(std::string&)>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += std::string("unexpected exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > budget_seconds) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += "over time budget of " + std::to_string(budget_seconds) + " s";
        }
        std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", id,
                    label.c_str(), secs, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// --- criterion 1: analytic gradients vs central finite differences ---------

bool check_gradients(std::string& detail) {
    const std::size_t dim = 10;
    const std::size_t negatives = 5;
    const double h = 1e-5;
    auto rng = make_rng(2026, "acceptance-gradient");
    double worst = 0.0;

    for (int trial = 0; trial < 100; ++trial) {
        EmbeddingMatrix emb(2 + negatives, dim, true);
        for (NodeId v = 0; v < 2 + negatives; ++v)
            for (std::size_t k = 0; k < dim; ++k) {
                emb.x(v)[k] = 2.0 * uniform01(rng) - 1.0;
                emb.context(v)[k] = 2.0 * uniform01(rng) - 1.0;
            }

        const int edge_sign = uniform_below(rng, 2) == 0 ? 1 : -1;
        const Edge e{0, 1, edge_sign * static_cast<std::int32_t>(1 + uniform_below(rng, 5))};
        std::vector<TargetedDraw> draws;
        std::vector<NodeId> partners = {1};
        std::vector<int> signs = {edge_sign};
        for (std::size_t k = 0; k < negatives; ++k) {
            const NodeId v = static_cast<NodeId>(2 + k);
            const int s = uniform_below(rng, 2) == 0 ? 1 : -1;
            draws.push_back({v, s, false});
            partners.push_back(v);
            signs.push_back(s);
        }

        const std::vector<double> x0(emb.x(0), emb.x(0) + dim);
        std::vector<std::vector<double>> ctxs;
        for (NodeId v : partners) ctxs.emplace_back(emb.context(v), emb.context(v) + dim);

        EmbeddingMatrix updated = emb;
        const double rho = 1.0;
        const double objective = edge_update(updated, e, draws, rho, nullptr);
        if (!close(objective, oracles::pair_objective(x0, ctxs, signs), 1e-9)) {
            detail = "reported objective diverges from the oracle";
            return false;
        }

        for (std::size_t k = 0; k < dim; ++k) {
            std::vector<double> hi = x0, lo = x0;
            hi[k] += h;
            lo[k] -= h;
            const double fd = (oracles::pair_objective(hi, ctxs, signs) -
                               oracles::pair_objective(lo, ctxs, signs)) /
                              (2.0 * h);
            const double analytic = (updated.x(0)[k] - x0[k]) / rho;
            worst = std::max(worst, rel_err(analytic, fd));
        }
        for (std::size_t p = 0; p < partners.size(); ++p) {
            for (std::size_t k = 0; k < dim; ++k) {
                std::vector<std::vector<double>> hi = ctxs, lo = ctxs;
                hi[p][k] += h;
                lo[p][k] -= h;
                const double fd = (oracles::pair_objective(x0, hi, signs) -
                                   oracles::pair_objective(x0, lo, signs)) /
                                  (2.0 * h);
                const double analytic = (updated.context(partners[p])[k] - ctxs[p][k]) / rho;
                worst = std::max(worst, rel_err(analytic, fd));
            }
        }
    }

    char buf[48];
    std::snprintf(buf, sizeof(buf), "max relative error %.2e", worst);
    detail = buf;
    return worst <= 1e-4;
}

// --- criteria 2-4: quality bars on the two-community benchmark -------------

FinalEmbedding train_two_community(const SignedGraph& g, std::uint64_t seed, SampleMode mode) {
    WalkConfig wcfg;
    wcfg.seed = seed;
    NodeCache cache;
    if (mode == SampleMode::targeted) cache = build_cache(g, wcfg);

    TrainConfig tcfg;
    tcfg.dimension = 16;
    tcfg.total_samples = 2'000'000;
    tcfg.mode = mode;
    tcfg.seed = seed;
    TrainResult result = train(g, mode == SampleMode::targeted ? &cache : nullptr, tcfg);
    return final_embedding(result.embedding, false);
}

bool check_distance_ratio(std::string& detail) {
    int wins = 0;
    std::string ratios;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SignedGraph g = two_community_graph(seed);
        FinalEmbedding emb = train_two_community(g, seed, SampleMode::targeted);
        DistanceStats st = distance_stats(emb, g.edges());
        const double ratio = st.ratio.value_or(std::nan(""));
        if (st.ratio && ratio < 0.7) ++wins;
        if (!ratios.empty()) ratios += ' ';
        ratios += fmt3(ratio);
    }
    detail = "ratios: " + ratios;
    return wins >= 4;
}

ExperimentConfig benchmark_config(SampleMode mode) {
    ExperimentConfig cfg;
    cfg.train.dimension = 16;
    cfg.train.total_samples = 2'000'000;
    cfg.train.mode = mode;
    cfg.repeats = 5;
    cfg.seed = 1;
    return cfg;
}

bool check_edge_sign_prediction(std::string& detail) {
    SignedGraph g = two_community_graph(1);
    const double targeted = edge_sign_experiment(g, benchmark_config(SampleMode::targeted),
                                                 EdgeFeatureOp::hadamard)
                                .rows.back()
                                .micro;
    const double ns = edge_sign_experiment(g, benchmark_config(SampleMode::negative_sampling),
                                           EdgeFeatureOp::hadamard)
                          .rows.back()
                          .micro;
    detail = "mean micro targeted " + fmt3(targeted) + " vs ns " + fmt3(ns);
    return targeted >= 0.90 && targeted >= ns;
}

bool check_node_label_prediction(std::string& detail) {
    SignedGraph g = two_community_graph(1);
    NodeLabels labels = two_community_labels();
    const double targeted =
        node_label_experiment(g, labels, benchmark_config(SampleMode::targeted)).back().micro;
    const double ns =
        node_label_experiment(g, labels, benchmark_config(SampleMode::negative_sampling))
            .back()
            .micro;
    detail = "mean micro targeted " + fmt3(targeted) + " vs ns " + fmt3(ns);
    return targeted >= 0.90 && targeted >= ns;
}

// --- criterion 5: every recorded conflict certifies an unbalanced cycle ----

bool check_conflict_witnesses(std::string& detail) {
    auto meta = make_rng(7, "acceptance-witness");
    std::size_t witnesses_checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const double edge_prob = 0.08 + 0.32 * uniform01(meta);
        const double negative_prob = 0.15 + 0.7 * uniform01(meta);
        SignedGraph g = oracles::random_signed_graph(20, edge_prob, negative_prob,
                                                     1000 + static_cast<std::uint64_t>(trial),
                                                     trial % 3 == 0);
        WalkConfig cfg;
        cfg.walk_length = 12;
        cfg.walks_per_node = 3;
        cfg.seed = static_cast<std::uint64_t>(trial);
        cfg.record_witnesses = true;
        NodeCache cache = build_cache(g, cfg);
        if (cache.witnesses.size() != cache.conflict_count) {
            detail = "witness count disagrees with conflict count";
            return false;
        }
        for (const ConflictWitness& w : cache.witnesses) {
            ++witnesses_checked;
            if (!detect_unbalanced_cycle(g, w.positive_path, w.negative_path)) {
                detail = "conflict without an unbalanced cycle certificate";
                return false;
            }
        }
    }
    if (witnesses_checked == 0) {
        detail = "random graphs produced no conflicts to check";
        return false;
    }

    for (int trial = 0; trial < 50; ++trial) {
        SignedGraph g = oracles::random_balanced_graph(
            20, 0.3, 5000 + static_cast<std::uint64_t>(trial));
        WalkConfig cfg;
        cfg.walk_length = 12;
        cfg.walks_per_node = 3;
        cfg.seed = static_cast<std::uint64_t>(trial);
        if (build_cache(g, cfg).conflict_count != 0) {
            detail = "balanced graph reported a conflict";
            return false;
        }
    }

    detail = std::to_string(witnesses_checked) + " witnesses certified";
    return true;
}

// --- criterion 6: conflict resolution vs exhaustive path enumeration -------

bool check_conflict_resolution(std::string& detail) {
    std::size_t pairs_checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        SignedGraph g = oracles::random_signed_graph(12, 0.28, 0.4,
                                                     2000 + static_cast<std::uint64_t>(trial),
                                                     trial % 4 == 0);
        const NodeId n = static_cast<NodeId>(g.node_count());
        for (NodeId i = 0; i < n; ++i)
            for (NodeId u = 0; u < n; ++u) {
                if (i == u) continue;
                auto info = oracles::shortest_path_info(g, i, u);
                if (!info) {
                    try {
                        resolve_conflict(g, i, u);
                        detail = "resolved a pair the oracle says is unreachable";
                        return false;
                    } catch (const std::exception&) {
                    }
                    continue;
                }
                ++pairs_checked;
                if (resolve_conflict(g, i, u) != oracles::resolved_sign(*info)) {
                    detail = "sign disagrees with exhaustive enumeration";
                    return false;
                }
            }
    }

    // The eight-cycle where two equal-length walks around opposite sides meet
    // with opposite sign products: nearer meeting point resolves positive,
    // farther one negative.
    SignedGraph cycle = SignedGraph::from_edges(
        8, false,
        {{0, 1, -1}, {1, 2, -1}, {2, 3, 1}, {3, 4, 1}, {4, 5, -1}, {5, 6, 1}, {6, 7, 1}, {7, 0, 1}});
    if (resolve_conflict(cycle, 0, 3) != 1 || resolve_conflict(cycle, 0, 4) != -1) {
        detail = "hand-built eight-cycle resolves to the wrong sides";
        return false;
    }

    detail = std::to_string(pairs_checked) + " reachable pairs agree";
    return true;
}

// --- criterion 7: scalability at n = 100k ----------------------------------

bool check_scalability(std::string& detail) {
    const auto wall = [] { return std::chrono::steady_clock::now(); };
    const auto t0 = wall();
    SignedGraph g = generate_er_signed(100'000, 10.0, 0.2, 1);

    WalkConfig wcfg;
    wcfg.seed = 1;
    const auto t1 = wall();
    NodeCache cache = build_cache(g, wcfg);
    const double cache_seconds = std::chrono::duration<double>(wall() - t1).count();

    TrainConfig tcfg;
    tcfg.dimension = 100;
    tcfg.total_samples = 10'000'000;
    tcfg.seed = 1;
    TrainResult single = train(g, &cache, tcfg);
    const double end_to_end = std::chrono::duration<double>(wall() - t0).count();
    const double opt_single = single.stats.optimize_seconds;

    bool ok = true;
    detail = "end-to-end " + fmt3(end_to_end) + " s, cache " + fmt3(cache_seconds) +
             " s, optimize " + fmt3(opt_single) + " s";
    if (end_to_end >= 600.0) ok = false;
    if (cache_seconds >= 0.2 * opt_single) {
        ok = false;
        detail += "; cache exceeds 20% of optimization";
    }

    if (std::thread::hardware_concurrency() >= 4) {
        tcfg.threads = 4;
        TrainResult multi = train(g, &cache, tcfg);
        const double speedup = opt_single / multi.stats.optimize_seconds;
        detail += ", 4-thread speedup " + fmt3(speedup) + "x";
        if (speedup < 2.0) ok = false;
    } else {
        detail += "; thread-speedup check needs >= 4 cores, machine has " +
                  std::to_string(std::thread::hardware_concurrency());
    }
    return ok;
}

// --- criterion 8: alliance vs hostility distances on the tribes fixture ----

bool check_tribes_fixture(std::string& detail) {
    SignedGraph g = load_edge_list_file(std::string(SIGNET_DATA_DIR) + "/tribes.edges", false);
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        WalkConfig wcfg;
        wcfg.seed = seed;
        NodeCache cache = build_cache(g, wcfg);
        TrainConfig tcfg;
        tcfg.dimension = 2;
        tcfg.total_samples = 200'000;
        tcfg.seed = seed;
        TrainResult result = train(g, &cache, tcfg);
        DistanceStats st = distance_stats(final_embedding(result.embedding, false), g.edges());
        if (st.mean_pos < st.mean_neg) ++wins;
    }
    detail = std::to_string(wins) + "/5 seeds put alliances closer";
    return wins >= 4;
}

// --- criterion 9: metric exactness and sampler oracles ----------------------

bool check_metrics_and_sampler_oracles(std::string& detail) {
    for (std::size_t k = 0; k < kFrozenF1Cases.size(); ++k) {
        const FrozenF1Case& c = kFrozenF1Cases[k];
        ConfusionCounts m(c.classes);
        for (std::size_t i = 0; i < c.classes; ++i)
            for (std::size_t j = 0; j < c.classes; ++j)
                for (std::size_t rep = 0; rep < c.counts[i * c.classes + j]; ++rep) m.add(i, j);
        if (!close(micro_f1(m), c.micro, 1e-12) || !close(macro_f1(m), c.macro, 1e-12)) {
            detail = "frozen confusion matrix " + std::to_string(k) + " mismatch";
            return false;
        }
    }

    ConfusionCounts worked(2);
    for (int k = 0; k < 6; ++k) worked.add(0, 0);
    worked.add(0, 1);
    worked.add(1, 0);
    worked.add(1, 1);
    worked.add(1, 1);
    if (!close(micro_f1(worked), 0.8, 1e-12) ||
        !close(macro_f1(worked), 0.7619047619047619, 1e-12)) {
        detail = "worked binary example mismatch";
        return false;
    }

    auto rng = make_rng(11, "acceptance-signs");
    for (int trial = 0; trial < 25; ++trial) {
        SignedGraph g = oracles::random_signed_graph(15, 0.3, 0.4,
                                                     3000 + static_cast<std::uint64_t>(trial),
                                                     trial % 2 == 0);
        for (NodeId start = 0; start < g.node_count(); ++start) {
            std::vector<NodeId> walk = random_walk(g, start, 8, rng);
            std::vector<NodeId> full = {start};
            full.insert(full.end(), walk.begin(), walk.end());
            if (estimate_walk_signs(g, start, walk) != oracles::prefix_sign_products(g, full)) {
                detail = "walk sign estimate disagrees with the prefix-product oracle";
                return false;
            }
        }
    }

    SignedGraph two = SignedGraph::from_edges(3, false, {{0, 1, 1}, {1, 2, -3}});
    AliasTable alias = build_edge_alias(two);
    if (std::abs(alias.total_weight() - 4.0) > 1e-12) {
        detail = "alias total weight is not the magnitude sum";
        return false;
    }
    auto draw_rng = make_rng(11, "acceptance-alias");
    std::size_t heavy = 0;
    const std::size_t trials = 1'000'000;
    for (std::size_t k = 0; k < trials; ++k) {
        Edge e = draw_edge(two, alias, draw_rng);
        heavy += e.weight < 0 ? 1 : 0;
    }
    if (!oracles::within_three_sigma(static_cast<double>(heavy), static_cast<double>(trials),
                                     0.75)) {
        detail = "alias draw frequency off for 3:1 magnitude weights";
        return false;
    }

    detail = std::to_string(kFrozenF1Cases.size()) + " frozen matrices exact";
    return true;
}

// --- criterion 10: byte-identical reruns of every subcommand ---------------

struct CommandCheck {
    std::string name;
    std::string args;               // with {run} placeholders for per-run paths
    std::vector<std::string> outs;  // produced artifacts, relative to the run dir
    bool capture_stdout = false;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool check_determinism(std::string& detail) {
    const fs::path root = fs::temp_directory_path() / "signet-acceptance";
    fs::remove_all(root);
    fs::create_directories(root / "r1");
    fs::create_directories(root / "r2");

    const std::string bin = SIGNET_BIN_PATH;
    const std::string shared = (root / "shared").string();
    fs::create_directories(shared);

    // shared fixtures the later subcommands read
    if (std::system((bin + " gen --out " + shared +
                     "/base.edges --nodes 300 --avg-degree 8 --neg 0.2 --seed 9 > /dev/null")
                        .c_str()) != 0) {
        detail = "fixture generation failed";
        return false;
    }
    if (std::system((bin + " gen --out " + shared +
                     "/base-directed.edges --nodes 120 --avg-degree 6 --neg 0.3 --seed 9"
                     " --directed > /dev/null")
                        .c_str()) != 0) {
        detail = "directed fixture generation failed";
        return false;
    }
    {
        std::ofstream labels(shared + "/base.labels");
        for (int v = 0; v < 300; ++v) labels << v << ' ' << v % 2 << '\n';
        std::ofstream dlabels(shared + "/base-directed.labels");
        for (int v = 0; v < 120; ++v) dlabels << v << ' ' << (v < 60 ? 0 : 1) << '\n';
    }

    const std::vector<CommandCheck> checks = {
        {"gen",
         "gen --out {run}/gen.edges --nodes 300 --avg-degree 8 --neg 0.2 --seed 9",
         {"gen.edges"},
         false},
        {"stats", "stats --input " + shared + "/base.edges --undirected", {}, true},
        {"train",
         "train --input " + shared + "/base.edges --out {run}/train.emb --undirected --dim 8"
         " --samples 30000 --walk-len 10 --seed 9 --threads 1",
         {"train.emb"},
         false},
        {"eval-edges",
         "eval-edges --input " + shared + "/base.edges --undirected --dim 8 --samples 20000"
         " --walk-len 10 --repeats 2 --seed 9 --op hadamard --threads 1 --out {run}/edges.csv",
         {"edges.csv"},
         false},
        {"eval-nodes",
         "eval-nodes --input " + shared + "/base.edges --labels " + shared +
             "/base.labels --undirected --dim 8 --samples 20000 --walk-len 10 --repeats 2"
             " --seed 9 --threads 1 --out {run}/nodes.csv",
         {"nodes.csv"},
         false},
        {"partial",
         "partial --input " + shared + "/base-directed.edges --labels " + shared +
             "/base-directed.labels --directed --dim 8 --samples 10000 --walk-len 10"
             " --fractions 0.0,0.25 --seed 9 --threads 1 --out {run}/partial.csv",
         {"partial.csv"},
         false},
        {"dump-cache",
         "dump-cache --input " + shared + "/base.edges --undirected --walk-len 10"
         " --walks-per-node 2 --seed 9 --threads 1 --out {run}/cache.txt",
         {"cache.txt"},
         false},
    };

    for (const CommandCheck& check : checks) {
        std::vector<std::string> artifacts[2];
        for (int run = 0; run < 2; ++run) {
            const fs::path dir = root / (run == 0 ? "r1" : "r2");
            std::string args = check.args;
            for (std::size_t pos = args.find("{run}"); pos != std::string::npos;
                 pos = args.find("{run}")) {
                args.replace(pos, 5, dir.string());
            }
            const fs::path captured = dir / (check.name + ".stdout");
            const std::string cmd = bin + " " + args + " > " + captured.string();
            if (std::system(cmd.c_str()) != 0) {
                detail = check.name + " exited nonzero";
                return false;
            }
            for (const std::string& out : check.outs)
                artifacts[run].push_back(slurp(dir / out));
            if (check.capture_stdout) artifacts[run].push_back(slurp(captured));
        }
        if (artifacts[0] != artifacts[1]) {
            detail = check.name + " outputs differ between identical runs";
            return false;
        }
        if (!artifacts[0].empty() && artifacts[0][0].empty()) {
            detail = check.name + " produced an empty artifact";
            return false;
        }
    }

    detail = "7 subcommands byte-identical";
    return true;
}

}  // namespace

int main() {
    Harness h;
    h.run(1, "analytic edge-update gradients match finite differences", 5.0, check_gradients);
    h.run(2, "two-community distance ratio below 0.7 in at least 4 of 5 seeds", 300.0,
          check_distance_ratio);
    h.run(3, "edge-sign prediction reaches 0.90 micro F1 and beats plain negative sampling",
          300.0, check_edge_sign_prediction);
    h.run(4, "node-label prediction reaches 0.90 micro F1 and beats plain negative sampling",
          300.0, check_node_label_prediction);
    h.run(5, "every cache conflict carries an unbalanced-cycle certificate", 30.0,
          check_conflict_witnesses);
    h.run(6, "conflict resolution matches exhaustive shortest-path enumeration", 30.0,
          check_conflict_resolution);
    h.run(7, "100k-node end-to-end run fits the time budget with negligible cache cost", 600.0,
          check_scalability);
    h.run(8, "tribes embedding keeps alliances closer than hostilities", 10.0,
          check_tribes_fixture);
    h.run(9, "F1 metrics exact on frozen matrices and sampler oracles agree", 30.0,
          check_metrics_and_sampler_oracles);
    h.run(10, "all subcommands rerun byte-identically with one thread and a fixed seed", 600.0,
          check_determinism);

    if (h.failures != 0) {
        std::printf("%d criterion(s) failing\n", h.failures);
        return 1;
    }
    std::printf("all 10 criteria passing\n");
    return 0;
}
