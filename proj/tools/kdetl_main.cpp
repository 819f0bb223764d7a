// kdetl command-line harness.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kdetl/error.hpp"
#include "kdetl/experiment.hpp"
#include "kdetl/graph_io.hpp"
#include "kdetl/hc.hpp"
#include "kdetl/params.hpp"
#include "kdetl/pc.hpp"
#include "kdetl/report.hpp"
#include "kdetl/synthetic.hpp"
#include "kdetl/transfer.hpp"

namespace fs = std::filesystem;
using namespace kdetl;

namespace {

StructuralNetwork network_from_spec(const std::string& spec) {
    ExperimentConfig cfg;
    apply_override(cfg, "network=" + spec);
    if (cfg.network_kind == NetworkKind::csv) throw Error("invalid-network", "expected spbn:<id> or lgbn:<path>");
    return config_network(cfg);
}

std::optional<std::size_t> cap(long v) {
    if (v < 0) return std::nullopt;
    return static_cast<std::size_t>(v);
}

struct LearnOptions {
    std::string data;
    std::vector<std::string> sources;
    std::string algorithm = "hc";
    std::uint64_t seed = 1;
    std::string out = "graph.txt";
    std::string bundle;
    std::string trace;
    double alpha = 0.05;
    long max_sepset = 5;
    std::size_t k_folds = 5;
    std::size_t patience = 3;
    long max_indegree = 5;
    double eta = -1.0;
};

int run_learn(const LearnOptions& o) {
    const Dataset target = load_csv(o.data);
    const bool tl = is_transfer_algorithm(o.algorithm);
    std::optional<TransferContext> ctx;
    if (tl) {
        std::vector<Dataset> sources;
        for (const auto& s : o.sources) sources.push_back(load_csv(s));
        ctx = TransferContext::build(target, std::move(sources));
        if (o.eta > 0.0) ctx = ctx->with_eta(o.eta);
        std::cerr << "eta=" << ctx->eta() << " kept_sources=" << ctx->kept().size() << '\n';
    }
    const Seed seed{o.seed};
    Dag g;
    if (is_pc_family(o.algorithm)) {
        PcConfig pc;
        pc.alpha = o.alpha;
        pc.max_sepset_size = cap(o.max_sepset);
        pc.rcot.seed = seed.derive("rcot");
        if (tl) {
            std::vector<PooledPValueTrace> trace;
            g = pcs_tl(*ctx, pc, &trace);
            if (!o.trace.empty()) write_pvalue_trace(trace, o.trace);
        } else {
            g = pc_stable(target, pc);
        }
    } else {
        HcConfig hcfg;
        hcfg.k_folds = o.k_folds;
        hcfg.patience = o.patience;
        hcfg.max_indegree = cap(o.max_indegree);
        hcfg.seed = seed.derive("hc");
        const HcResult res = tl ? hc_tl_run(*ctx, hcfg) : hc_run(target, hcfg);
        if (!o.trace.empty()) write_move_trace(res, res.dag.nodes(), o.trace);
        g = res.dag;
    }
    write_dag(g, o.out);
    if (!o.bundle.empty()) save_bundle(tl ? fit_tl_kdebn(g, *ctx) : as_tl(fit_kdebn(g, target)), o.bundle);
    std::cout << "arcs=" << g.num_arcs() << " written=" << o.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel-density Bayesian networks with transfer learning"};
    app.require_subcommand(1);

    // sample
    std::string s_network = "spbn:1", s_out = "sample.csv";
    std::size_t s_n = 1000;
    std::uint64_t s_seed = 1;
    auto* sample_cmd = app.add_subcommand("sample", "Sample a dataset from a synthetic or linear-Gaussian network");
    sample_cmd->add_option("--network", s_network, "spbn:<1-4> or lgbn:<path>");
    sample_cmd->add_option("-n,--rows", s_n, "number of rows");
    sample_cmd->add_option("--seed", s_seed);
    sample_cmd->add_option("-o,--out", s_out);

    // corrupt
    std::string c_network, c_input, c_out = "source.csv", c_graph_out;
    double c_fraction = 0.0, c_noise_mean = 0.0, c_noise_std = 1.0;
    std::size_t c_n = 3000;
    std::uint64_t c_seed = 1;
    auto* corrupt_cmd = app.add_subcommand("corrupt", "Build a corrupted source: modify arcs, sample, add noise");
    corrupt_cmd->add_option("--network", c_network, "spbn:<id> or lgbn:<path> (modify + sample + noise)");
    corrupt_cmd->add_option("--input", c_input, "existing CSV (noise only)");
    corrupt_cmd->add_option("--fraction", c_fraction, "fraction of arcs to relocate");
    corrupt_cmd->add_option("--noise-mean", c_noise_mean);
    corrupt_cmd->add_option("--noise-std", c_noise_std);
    corrupt_cmd->add_option("-n,--rows", c_n);
    corrupt_cmd->add_option("--seed", c_seed);
    corrupt_cmd->add_option("-o,--out", c_out);
    corrupt_cmd->add_option("--graph-out", c_graph_out, "write the modified network's DAG");

    // learn
    LearnOptions lo;
    auto* learn_cmd = app.add_subcommand("learn", "Learn a structure (and optionally a parameter bundle)");
    learn_cmd->add_option("--data", lo.data, "target CSV")->required();
    learn_cmd->add_option("--source", lo.sources, "source CSV (repeatable)");
    learn_cmd->add_option("--algorithm", lo.algorithm)->check(CLI::IsMember({"pc", "pcs-tl", "hc", "hc-tl"}));
    learn_cmd->add_option("--seed", lo.seed);
    learn_cmd->add_option("-o,--out", lo.out, "graph file");
    learn_cmd->add_option("--bundle", lo.bundle, "write a parameter bundle directory");
    learn_cmd->add_option("--trace", lo.trace, "p-value trace (PC family) or move trace (HC family) CSV");
    learn_cmd->add_option("--alpha", lo.alpha);
    learn_cmd->add_option("--max-sepset-size", lo.max_sepset, "-1 for unlimited");
    learn_cmd->add_option("--k-folds", lo.k_folds);
    learn_cmd->add_option("--patience", lo.patience);
    learn_cmd->add_option("--max-indegree", lo.max_indegree, "-1 for unlimited");
    learn_cmd->add_option("--eta", lo.eta, "override the target trust factor");

    // evaluate
    std::string e_bundle, e_data, e_reference, e_graph, e_train;
    bool e_normalize = false;
    auto* eval_cmd = app.add_subcommand("evaluate", "Test log-likelihood and structural error");
    eval_cmd->add_option("--bundle", e_bundle, "parameter bundle directory");
    eval_cmd->add_option("--graph", e_graph, "graph file (with --train instead of --bundle)");
    eval_cmd->add_option("--train", e_train, "training CSV for --graph");
    eval_cmd->add_option("--data", e_data, "test CSV");
    eval_cmd->add_option("--reference", e_reference, "reference graph for SHD/DHD");
    eval_cmd->add_flag("--normalize", e_normalize, "Monte-Carlo normalize pooled conditionals");

    // experiment
    std::string x_config;
    std::vector<std::string> x_overrides;
    auto* exp_cmd = app.add_subcommand("experiment", "Run the full experiment protocol");
    exp_cmd->add_option("--config", x_config, "config file")->required();
    exp_cmd->add_option("--set", x_overrides, "key=value override (repeatable)");

    // plot
    std::string p_results, p_out = "plots";
    auto* plot_cmd = app.add_subcommand("plot", "SVG charts from a results CSV");
    plot_cmd->add_option("--results", p_results)->required();
    plot_cmd->add_option("-o,--out", p_out);

    // stats
    std::string t_results, t_out = "stats";
    std::size_t t_max_n = 525;
    double t_alpha = 0.05;
    auto* stats_cmd = app.add_subcommand("stats", "Friedman and Bergmann-Hommel analysis of a results CSV");
    stats_cmd->add_option("--results", t_results)->required();
    stats_cmd->add_option("-o,--out", t_out);
    stats_cmd->add_option("--max-target-n", t_max_n);
    stats_cmd->add_option("--alpha", t_alpha);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        for (char& c : msg) {
            if (c == '\n') c = ' ';
        }
        std::cerr << "error: usage: " << msg << '\n';
        return 2;
    }

    try {
        if (*sample_cmd) {
            write_csv(sample(network_from_spec(s_network), s_n, Seed{s_seed}), s_out);
            std::cout << "rows=" << s_n << " written=" << s_out << '\n';
        } else if (*corrupt_cmd) {
            CorruptionSpec spec{c_fraction, c_noise_mean, c_noise_std, Seed{c_seed}};
            if (!c_input.empty()) {
                write_csv(add_noise(load_csv(c_input), spec), c_out);
            } else {
                if (c_network.empty()) throw Error("invalid-arguments", "corrupt needs --network or --input");
                ModificationLog log;
                const auto modified = modify_arcs(network_from_spec(c_network), spec, &log);
                for (const auto& m : log.messages) std::cerr << "warning: " << m << '\n';
                if (!c_graph_out.empty()) write_dag(modified.dag, c_graph_out);
                write_csv(add_noise(sample(modified, c_n, Seed{c_seed}.derive("sample")), spec), c_out);
            }
            std::cout << "written=" << c_out << '\n';
        } else if (*learn_cmd) {
            return run_learn(lo);
        } else if (*eval_cmd) {
            if (e_data.empty()) throw Error("invalid-arguments", "evaluate needs --data");
            const Dataset test = load_csv(e_data);
            TlKdeBayesianNetwork net;
            if (!e_bundle.empty()) {
                net = load_bundle(e_bundle);
            } else if (!e_graph.empty() && !e_train.empty()) {
                net = as_tl(fit_kdebn(read_dag(e_graph), load_csv(e_train)));
            } else {
                throw Error("invalid-arguments", "evaluate needs --bundle or --graph with --train");
            }
            TlEvalOptions opts;
            opts.normalize = e_normalize;
            std::cout.precision(17);
            std::cout << "test_loglik=" << tl_loglik(net, test, opts) << '\n';
            if (!e_reference.empty()) {
                const Dag ref = read_dag(e_reference);
                Dag aligned(ref.nodes());
                for (const auto& a : net.dag.arcs()) {
                    aligned.add_arc(net.dag.nodes().name(a.parent), net.dag.nodes().name(a.child));
                }
                std::cout << "shd=" << shd(ref, aligned) << "\ndhd=" << dhd(ref, aligned) << '\n';
            }
        } else if (*exp_cmd) {
            ExperimentConfig cfg = load_config(x_config);
            for (const auto& o : x_overrides) apply_override(cfg, o);
            const auto out = run_experiment(cfg, [](const std::string& m) { std::cerr << m << '\n'; });
            std::cout << "rows=" << out.rows.size() << " written=" << out.results_csv.string() << '\n';
        } else if (*plot_cmd) {
            for (const auto& f : plot_results(read_results(p_results), p_out)) std::cout << f.string() << '\n';
        } else if (*stats_cmd) {
            const auto reports = stats_report(read_results(t_results), t_max_n, t_alpha, t_out);
            for (const auto& r : reports) {
                std::cout << r.metric << ": friedman=" << r.friedman.statistic << " p=" << r.friedman.p_value
                          << " blocks=" << r.blocks << " groups=" << r.groups.size() << '\n';
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
