// Acceptance checks AC1-AC8. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
// usage: fmcl_acceptance <path to fmcl CLI> <scratch directory>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "fmcl/harness.hpp"
#include "fmcl/linalg.hpp"
#include "oracles.hpp"

using namespace fmcl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Checker {
public:
    void require(bool ok, const std::string& what)
    {
        if (!ok && failures_++ < 5) failed_ += (failed_.empty() ? "" : "; ") + what;
    }
    Outcome outcome(const std::string& summary) const
    {
        return {failures_ == 0, failures_ == 0 ? summary : summary + " | failed: " + failed_};
    }

private:
    std::size_t failures_ = 0;
    std::string failed_;
};

std::string fmt(double x, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    return buf;
}

// ---------------------------------------------------------------- AC1
Outcome distance_fidelity()
{
    Checker check;
    std::mt19937_64 gen(1);
    double worst = 0.0;
    std::size_t sets = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t n = 2 + gen() % 11;
        const std::size_t classes = 1 + gen() % 5;
        const auto sigs = oracle::random_signatures(gen, n, classes, 1 + gen() % 6);
        for (bool scaling : {true, false}) {
            DistanceParams params;
            params.overlap_scaling = scaling;
            const auto build = build_distance_matrix(sigs, params, 1 + trial % 4);
            const auto ref = oracle::distance_matrix(sigs, params.alpha, params.beta, params.epsilon, scaling);
            worst = std::max(worst, std::abs(build.d_big - ref.d_big));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(build.matrix(i, j) - ref.d[i][j]));
            ++sets;
        }
    }
    check.require(worst <= 1e-12, "max deviation " + fmt(worst));

    auto sig = [](std::initializer_list<std::pair<int, ClassPrototype>> entries) {
        ClientSignature s;
        for (const auto& [c, p] : entries) s.entries[c] = p;
        s.dim = 2;
        return s;
    };
    const auto full = pairwise_class_distance(sig({{0, {{1, 0}, 0.5, 1}}, {1, {{0, 1}, 0.5, 1}}}),
                                              sig({{0, {{0, 1}, 0.5, 1}}, {1, {{1, 0}, 0.5, 1}}}), {});
    const auto low = pairwise_class_distance(sig({{0, {{1, 0}, 0.1, 1}}, {1, {{1, 1}, 0.9, 1}}}),
                                             sig({{0, {{0, 1}, 0.1, 1}}, {2, {{1, 1}, 0.9, 1}}}), {});
    check.require(full && std::abs(*full - 1.0 / 1.001) <= 1e-12 && std::abs(*full - 0.9990) < 5e-5,
                  "full-overlap example");
    check.require(low && std::abs(*low - 10.0 * 0.1 / 0.101) <= 1e-12 && std::abs(*low - 9.901) < 5e-4,
                  "low-overlap example");
    return check.outcome(std::to_string(sets) + " random sets, max |diff| " + fmt(worst) + "; hand examples " +
                         fmt(full.value_or(-1)) + ", " + fmt(low.value_or(-1)));
}

// ---------------------------------------------------------------- AC2
Outcome clustering_fidelity()
{
    Checker check;
    std::mt19937_64 gen(2);
    std::size_t runs = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + trial % 8;
        const auto rows = oracle::random_matrix(gen, n, trial % 2 == 0);
        const auto d = oracle::from_rows(rows);
        for (Linkage l : {Linkage::single, Linkage::complete, Linkage::average}) {
            for (std::size_t k = 1; k <= n; ++k) {
                const auto got = agglomerate(d, l, StopAtK{k});
                const auto ref = oracle::agglomerate(rows, l, k, std::nullopt);
                bool same = got.labels == ref.labels && got.merge_log.size() == ref.merged.size();
                for (std::size_t m = 0; same && m < ref.merged.size(); ++m) {
                    same = got.merge_log[m].cluster_a == ref.merged[m].first &&
                           got.merge_log[m].cluster_b == ref.merged[m].second &&
                           std::abs(got.merge_log[m].distance - ref.heights[m]) <= 1e-12;
                }
                check.require(same, "trial " + std::to_string(trial) + " " + to_string(l) + " K=" + std::to_string(k));
                ++runs;
            }
        }
    }
    std::size_t consistent = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 9;
        const auto d = oracle::from_rows(oracle::random_matrix(gen, n, trial % 3 == 0));
        std::uniform_real_distribution<double> theta(0.0, 8.0);
        const double t = theta(gen);
        bool ok = true;
        for (Linkage l : {Linkage::single, Linkage::complete, Linkage::average}) {
            const auto by_threshold = agglomerate(d, l, StopAtThreshold{t});
            const auto by_k = agglomerate(d, l, StopAtK{by_threshold.num_clusters});
            ok = ok && by_threshold.labels == by_k.labels;
            for (const auto& m : by_threshold.merge_log) ok = ok && m.distance <= t;
        }
        check.require(ok, "threshold/K instance " + std::to_string(trial));
        consistent += ok;
    }
    return check.outcome(std::to_string(runs) + " exhaustive-reference runs (n<=8, 3 linkages); " +
                         std::to_string(consistent) + "/100 threshold-vs-K instances consistent");
}

// ---------------------------------------------------------------- AC3
Outcome silhouette_cv()
{
    Checker check;
    std::mt19937_64 gen(3);
    double worst_s = 0, worst_cv = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 11;
        const auto rows = oracle::random_matrix(gen, n, false);
        std::vector<int> labels(n);
        for (auto& l : labels) l = static_cast<int>(gen() % (1 + trial % 4));
        const auto d = oracle::from_rows(rows);
        worst_s = std::max(worst_s, std::abs(silhouette_score(d, assignment_from_labels(labels)) -
                                             oracle::silhouette(rows, labels)));
        worst_cv = std::max(worst_cv, std::abs(coefficient_of_variation(d) - oracle::cv(rows)));
    }
    check.require(worst_s <= 1e-12, "silhouette deviation " + fmt(worst_s));
    check.require(worst_cv <= 1e-12, "CV deviation " + fmt(worst_cv));

    oracle::Matrix two(6, std::vector<double>(6, 0));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            if (i != j) two[i][j] = (i < 3) == (j < 3) ? 0.1 : 1.0;
    const double s09 = silhouette_score(oracle::from_rows(two), assignment_from_labels({0, 0, 0, 1, 1, 1}));
    const double cv07 = coefficient_of_variation(oracle::from_rows({{0, 1, 1}, {1, 0, 4}, {1, 4, 0}}));
    check.require(std::abs(s09 - 0.9) <= 1e-15, "0.9 example gave " + fmt(s09, 17));
    check.require(cv07 == std::sqrt(2.0) / 2.0, "CV example gave " + fmt(cv07, 17));
    return check.outcome("100 random pairs: silhouette max |diff| " + fmt(worst_s) + ", CV max |diff| " +
                         fmt(worst_cv) + "; examples S=" + fmt(s09, 15) + ", CV=" + fmt(cv07, 15));
}

// ---------------------------------------------------------------- AC4
ExperimentConfig recovery_config()
{
    // True K = 3, N = 20, separation/stddev = 10/0.1 = 100, Dirichlet alpha = 0.1.
    ExperimentConfig c;
    c.name = "autok_recovery";
    c.data.synthetic.num_latent_clusters = 3;
    c.data.synthetic.num_classes = 10;
    c.data.synthetic.dim = 32;
    c.data.synthetic.samples_per_class_per_cluster = 2000;
    c.data.synthetic.class_mean_separation = 10.0;
    c.data.synthetic.within_class_stddev = 0.1;
    c.partition.num_clients = 20;
    c.partition.dirichlet_alpha = 0.1;
    c.clustering = ClusteringMode::auto_k;
    c.seeds = {0, 1, 2, 3, 4};
    return c;
}

Outcome autok_recovery()
{
    Checker check;
    const auto config = recovery_config();
    const auto data = load_data(config.data);
    std::size_t hits = 0;
    std::string picks;
    for (std::uint64_t seed : config.seeds) {
        const auto split = split_clients(data, config, seed);
        const auto result = cluster_clients(split, config, seed);
        const std::size_t k = result.autok->selected_k;
        picks += (picks.empty() ? "" : ",") + std::to_string(k);
        if (k == 3) {
            ++hits;
            check.require(result.ari && *result.ari == 1.0,
                          "seed " + std::to_string(seed) + " picked K=3 with ARI " + fmt(result.ari.value_or(-1)));
        }
    }
    check.require(hits >= 4, "K=3 selected on " + std::to_string(hits) + "/5 seeds");

    const AutoKConfig cfg;
    const bool windows = window_for_cv(0.35, cfg) == cfg.window_mid && window_for_cv(0.70, cfg) == cfg.window_high &&
                         window_for_cv(std::nextafter(0.35, 0.0), cfg) == cfg.window_low &&
                         window_for_cv(std::nextafter(0.70, 0.0), cfg) == cfg.window_mid;
    check.require(windows, "window boundaries");
    return check.outcome("selected K per seed [" + picks + "], K=3 on " + std::to_string(hits) +
                         "/5 with ARI=1 each time; CV 0.35->mid, 0.70->high");
}

// ---------------------------------------------------------------- AC5
Outcome engine_identities()
{
    Checker check;
    ExperimentConfig base;
    base.data.synthetic.num_latent_clusters = 2;
    base.data.synthetic.layout = LabelLayout::permuted;
    base.data.synthetic.samples_per_class_per_cluster = 60;
    base.partition.num_clients = 8;
    base.partition.dirichlet_alpha = 0.5;
    base.train.rounds = 100;
    base.train.prox_mu = 0.0;
    const auto data = load_data(base.data);
    const auto split = split_clients(data, base, 0);
    const auto truth = assignment_from_labels(split.ground_truth);

    const auto avg = run_federation(split.shards, truth, base.train, Strategy::fedavg);
    const auto prox = run_federation(split.shards, truth, base.train, Strategy::fedprox);
    bool same = avg.models == prox.models;
    for (std::size_t r = 0; r < avg.rounds.size(); ++r) {
        same = same && avg.rounds[r].mean.accuracy == prox.rounds[r].mean.accuracy &&
               avg.rounds[r].mean.loss == prox.rounds[r].mean.loss;
    }
    check.require(same, "FedProx(mu=0) != FedAvg");

    auto k1 = base;
    k1.clustering = ClusteringMode::fixed_k;
    k1.k = 1;
    k1.seeds = {0, 1};
    k1.train.rounds = 20;
    auto global = k1;
    global.clustering = ClusteringMode::global;
    const auto s1 = run_experiment(k1);
    const auto sg = run_experiment(global);
    bool k1_same = true;
    for (std::size_t s = 0; s < s1.seeds.size(); ++s) {
        for (std::size_t r = 0; r < s1.seeds[s].rounds.size(); ++r) {
            const auto& a = s1.seeds[s].rounds[r];
            const auto& b = sg.seeds[s].rounds[r];
            k1_same = k1_same && a.mean.accuracy == b.mean.accuracy && a.mean.loss == b.mean.loss &&
                      a.mean.macro_f1 == b.mean.macro_f1;
        }
    }
    check.require(k1_same, "K=1 run differs from global run");

    // K = N: each client's model equals its stand-alone local training, and
    // perturbing one client never moves another client's model.
    auto train = base.train;
    train.rounds = 10;
    std::vector<int> singletons(split.shards.size());
    std::iota(singletons.begin(), singletons.end(), 0);
    const auto kn = run_federation(split.shards, assignment_from_labels(singletons), train, Strategy::fedavg);
    bool isolated = true;
    for (std::size_t i = 0; i < split.shards.size(); ++i) {
        const auto alone = run_federation({split.shards[i]}, assignment_from_labels({0}), train, Strategy::fedavg);
        isolated = isolated && alone.models[0] == kn.models[i];
    }
    auto perturbed = split.shards;
    perturbed[0].train = perturbed[1].train;
    const auto kp = run_federation(perturbed, assignment_from_labels(singletons), train, Strategy::fedavg);
    for (std::size_t i = 1; i < split.shards.size(); ++i) isolated = isolated && kp.models[i] == kn.models[i];
    check.require(isolated, "cross-client parameter flow at K=N");

    std::mt19937_64 gen(5);
    std::normal_distribution<double> normal(0.0, 50.0);
    double worst_agg = 0;
    const ModelShape shape{Architecture::softmax_linear, 4, 3, 0};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ClientUpdate> updates(1 + trial % 10);
        for (auto& u : updates) {
            u.params = {shape, std::vector<double>(shape.parameter_count())};
            for (double& v : u.params.values) v = normal(gen);
            u.weight = static_cast<double>(1 + gen() % 300);
        }
        const auto got = aggregate(updates);
        for (std::size_t k = 0; k < got.values.size(); ++k) {
            long double num = 0, den = 0, comp = 0;
            for (const auto& u : updates) {
                const long double term = static_cast<long double>(u.weight) * u.params.values[k] - comp;
                const long double t = num + term;
                comp = (t - num) - term;
                num = t;
                den += u.weight;
            }
            worst_agg = std::max(worst_agg, std::abs(got.values[k] - static_cast<double>(num / den)));
        }
    }
    check.require(worst_agg <= 1e-12, "aggregate deviation " + fmt(worst_agg));

    double worst_fd = 0;
    std::normal_distribution<double> small(0.0, 0.5);
    for (std::size_t draw = 0; draw < 50; ++draw) {
        const auto arch = draw % 2 == 0 ? Architecture::softmax_linear : Architecture::mlp;
        const ModelShape s{arch, 2 + draw % 5, 2 + draw % 4, 3 + draw % 3};
        EmbeddingDataset ds(s.dim, s.num_classes);
        for (int i = 0; i < 6; ++i) {
            std::vector<double> x(s.dim);
            for (double& v : x) v = small(gen) * 2;
            ds.add(x, static_cast<int>(gen() % s.num_classes));
        }
        ModelParams p{s, std::vector<double>(s.parameter_count())};
        for (double& v : p.values) v = small(gen);
        std::vector<std::size_t> rows(ds.size());
        std::iota(rows.begin(), rows.end(), 0);
        std::vector<double> grad(p.values.size());
        batch_loss(p, ds, rows, grad);
        double diff = 0, scale = 0;
        for (std::size_t k = 0; k < p.values.size(); ++k) {
            auto plus = p, minus = p;
            plus.values[k] += 1e-6;
            minus.values[k] -= 1e-6;
            const double fd = (batch_loss(plus, ds, rows) - batch_loss(minus, ds, rows)) / 2e-6;
            diff += (fd - grad[k]) * (fd - grad[k]);
            scale += grad[k] * grad[k];
        }
        worst_fd = std::max(worst_fd, std::sqrt(diff / scale));
    }
    check.require(worst_fd <= 1e-6, "finite-difference relative error " + fmt(worst_fd));
    return check.outcome("FedProx(0)==FedAvg over 100 rounds; K=1==global; K=N isolated; aggregate max |diff| " +
                         fmt(worst_agg) + "; gradient max rel err " + fmt(worst_fd) + " over 50 draws");
}

// ---------------------------------------------------------------- AC6
ExperimentConfig ordering_config(const std::string& name, LabelLayout layout, std::size_t samples, double stddev,
                                 std::size_t rounds)
{
    ExperimentConfig c;
    c.name = name;
    c.data.synthetic.num_latent_clusters = 3;
    c.data.synthetic.num_classes = 10;
    c.data.synthetic.dim = 32;
    c.data.synthetic.samples_per_class_per_cluster = samples;
    c.data.synthetic.within_class_stddev = stddev;
    c.data.synthetic.layout = layout;
    c.partition.num_clients = 20;
    c.partition.dirichlet_alpha = 0.1;
    c.clustering = ClusteringMode::auto_k;
    c.train.rounds = rounds;
    c.seeds = {0, 1, 2, 3, 4};
    return c;
}

Outcome end_to_end_ordering()
{
    Checker check;
    auto fmcl = ordering_config("fmcl", LabelLayout::permuted, 2000, 0.1, 30);
    auto no_overlap = fmcl;
    no_overlap.name = "fmcl_no_overlap";
    no_overlap.distance.overlap_scaling = false;
    auto global = fmcl;
    global.name = "fedavg_global";
    global.clustering = ClusteringMode::global;
    const auto table = compare_strategies({fmcl, no_overlap, global});
    const double f = table.rows[0].accuracy.mean, n = table.rows[1].accuracy.mean, g = table.rows[2].accuracy.mean;
    check.require(f >= n, "permuted: FMCL < no-overlap");
    check.require(f >= g + 0.25, "permuted: FMCL < FedAvg + 0.25");
    check.require(f >= 0.90, "permuted: FMCL < 0.90");
    check.require(g <= 0.60, "permuted: FedAvg > 0.60");

    auto low = ordering_config("fmcl_low_overlap", LabelLayout::low_overlap, 100, 1.0, 20);
    auto low_no = low;
    low_no.name = "fmcl_low_overlap_no_overlap";
    low_no.distance.overlap_scaling = false;
    const auto low_table = compare_strategies({low, low_no});
    const double lf = low_table.rows[0].accuracy.mean, ln = low_table.rows[1].accuracy.mean;
    check.require(lf > ln, "low-overlap: removing the overlap term did not degrade accuracy");

    std::cout << table.to_text() << low_table.to_text();
    return check.outcome("permuted task FMCL " + fmt(f, 4) + " >= no-overlap " + fmt(n, 4) + ", FedAvg " + fmt(g, 4) +
                         "; low-overlap task FMCL " + fmt(lf, 4) + " > no-overlap " + fmt(ln, 4));
}

// ---------------------------------------------------------------- AC7
std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text(e.path());
    }
    return files;
}

Outcome cli_determinism(const std::string& cli, const fs::path& work)
{
    Checker check;
    fs::remove_all(work);
    fs::create_directories(work);
    ExperimentConfig c;
    c.name = "det";
    c.data.synthetic.samples_per_class_per_cluster = 60;
    c.partition.num_clients = 12;
    c.partition.dirichlet_alpha = 0.3;
    c.train.rounds = 5;
    c.train.participation = 0.5;
    c.seeds = {0, 1, 2};
    write_text(work / "a.json", config_to_json(c).dump(2));
    c.name = "det_prox";
    c.strategy = Strategy::fedprox;
    write_text(work / "b.json", config_to_json(c).dump(2));

    const std::vector<std::pair<std::string, std::string>> commands{
        {"generate", "--config a.json"}, {"partition", "--config a.json --seed 2"},
        {"signatures", "--config a.json"}, {"distances", "--config a.json"},
        {"cluster", "--config a.json"},    {"autok", "--config a.json"},
        {"train", "--config a.json --seed 1"}, {"run", "--config a.json"},
        {"compare", "--configs a.json b.json"},
    };
    std::size_t compared = 0;
    for (const auto& [sub, args] : commands) {
        std::map<std::string, std::string> reference;
        bool first = true;
        for (const char* threads : {"1", "1", "4", "4"}) {
            const auto out = work / (sub + "_out");
            fs::remove_all(out);
            const std::string cmd = "cd " + work.string() + " && " + cli + " " + sub + " " + args + " --threads " +
                                    threads + " --out " + out.string() + " > /dev/null 2>&1";
            const int rc = std::system(cmd.c_str());
            check.require(rc == 0, sub + " exited with " + std::to_string(rc));
            if (rc != 0) break;
            auto files = snapshot(out);
            if (first) {
                reference = std::move(files);
                first = false;
                check.require(!reference.empty(), sub + " wrote nothing");
            } else {
                check.require(files == reference, sub + " output differs (threads " + std::string(threads) + ")");
            }
        }
        compared += reference.size();
    }
    return check.outcome(std::to_string(commands.size()) + " subcommands x 4 runs (2 serial, 2 with 4 threads); " +
                         std::to_string(compared) + " artifact files byte-identical");
}

// ---------------------------------------------------------------- AC8
Outcome metrics_oracles()
{
    Checker check;
    std::mt19937_64 gen(8);
    std::size_t exact = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t c = 2 + trial % 4;
        const std::size_t n = 1 + gen() % 40;
        std::vector<double> p;
        std::vector<int> y;
        oracle::random_predictions(gen, n, c, p, y);
        const auto r = evaluate(p, y, c);
        const bool ok = r.macro_f1 == oracle::macro_f1(p, y, c) && r.macro_auc == oracle::macro_auc(p, y, c);
        check.require(ok, "instance " + std::to_string(trial));
        exact += ok;
    }
    double worst = 0;
    for (std::size_t c = 2; c <= 10; ++c) {
        std::vector<double> p(7 * c, 1.0 / static_cast<double>(c));
        std::vector<int> y(7);
        for (std::size_t i = 0; i < 7; ++i) y[i] = static_cast<int>(i % c);
        worst = std::max(worst, std::abs(evaluate(p, y, c).loss - std::log(static_cast<double>(c))));
    }
    check.require(worst <= 1e-9, "uniform loss deviation " + fmt(worst));
    return check.outcome(std::to_string(exact) + "/200 instances exact (macro-F1, macro-AUC); uniform loss |diff| " +
                         fmt(worst));
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc < 3) {
        std::cerr << "usage: fmcl_acceptance <fmcl cli> <scratch dir>\n";
        return 2;
    }
    const std::string cli = fs::absolute(argv[1]).string();
    const fs::path work = fs::absolute(argv[2]);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 distance fidelity", distance_fidelity},
        {"AC2 clustering fidelity", clustering_fidelity},
        {"AC3 silhouette and CV oracles", silhouette_cv},
        {"AC4 auto-K recovery", autok_recovery},
        {"AC5 FL-engine identities", engine_identities},
        {"AC6 end-to-end ordering", end_to_end_ordering},
        {"AC7 CLI determinism", [&] { return cli_determinism(cli, work); }},
        {"AC8 metrics oracles", metrics_oracles},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome result;
        try {
            result = fn();
        } catch (const std::exception& e) {
            result = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (result.pass ? "PASS " : "FAIL ") << name << ": " << result.detail << " (" << fmt(secs, 3)
                  << " s)" << std::endl;
        failed += !result.pass;
    }
    return failed == 0 ? 0 : 1;
}
