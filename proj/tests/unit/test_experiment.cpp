#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kdetl/error.hpp"
#include "kdetl/experiment.hpp"
#include "kdetl/report.hpp"

using namespace kdetl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("kdetl_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string drop_last_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

std::vector<ResultRow> fixture_rows() {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    const std::vector<std::string> algs{"pc", "pcs-tl", "hc", "hc-tl"};
    const std::vector<double> shift{0.0, 1.0, 0.5, 2.0};
    std::vector<ResultRow> rows;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        for (std::size_t t : {25u, 125u, 225u, 525u}) {
            for (std::size_t a = 0; a < algs.size(); ++a) {
                ResultRow r;
                r.dataset = "toy";
                r.algorithm = algs[a];
                r.target_n = t;
                r.seed = seed;
                r.test_loglik = -100.0 + 10.0 * shift[a] + n(rng);
                r.shd = 3;
                r.dhd = 10.0 - 3.0 * shift[a] + n(rng);
                rows.push_back(r);
            }
        }
    }
    return rows;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
    const auto cfg = parse_config(
        "# comment\nnetwork = spbn:3\nsources = 0, 0.1, 0.2\ngrid_start = 25\ngrid_step = 50\ngrid_end = 125\n"
        "algorithms = hc, hc-tl\nmax_indegree = none\nrepeats = 2\n");
    EXPECT_EQ(cfg.network_kind, NetworkKind::spbn);
    EXPECT_EQ(cfg.spbn_id, 3);
    EXPECT_EQ(cfg.sources.size(), 3u);
    EXPECT_FALSE(cfg.max_indegree.has_value());
    EXPECT_EQ(grid_points(cfg), (std::vector<std::size_t>{25, 75, 125}));
    EXPECT_EQ(cfg.algorithms, (std::vector<std::string>{"hc", "hc-tl"}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    try {
        parse_config("colour = blue\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "unknown-config-key");
    }
    EXPECT_THROW(parse_config("repeats = many\n"), Error);
    EXPECT_THROW(parse_config("algorithms = pc, magic\n"), Error);
    EXPECT_THROW(parse_config("grid_start = 100\ngrid_end = 50\n"), Error);
    EXPECT_THROW(parse_config("just words\n"), Error);
}

TEST(Config, Overrides) {
    ExperimentConfig cfg;
    apply_override(cfg, "seed=9");
    apply_override(cfg, "network = lgbn:/tmp/x.txt");
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.network_kind, NetworkKind::lgbn);
    EXPECT_THROW(apply_override(cfg, "seed"), Error);
}

TEST(Results, CsvRoundTrip) {
    auto rows = fixture_rows();
    rows[0].shd.reset();
    rows[0].dhd.reset();
    const auto text = format_results(rows);
    EXPECT_EQ(text.substr(0, text.find('\n')), std::string(kResultsHeader));
    const auto back = parse_results(text);
    ASSERT_EQ(back.size(), rows.size());
    EXPECT_FALSE(back[0].shd.has_value());
    EXPECT_EQ(back[5].test_loglik, rows[5].test_loglik);
    EXPECT_EQ(back[5].dhd, rows[5].dhd);
    EXPECT_EQ(format_results(back), text);
    EXPECT_THROW(parse_results("wrong,header\n"), Error);
}

TEST(Consensus, MajorityArcs) {
    Dag a({"x", "y", "z"}), b({"x", "y", "z"}), c({"x", "y", "z"});
    a.add_arc("x", "y");
    b.add_arc("x", "y");
    b.add_arc("y", "z");
    c.add_arc("z", "y");
    const auto g = consensus_graph({a, b, c});
    EXPECT_TRUE(g.has_arc(0, 1));
    EXPECT_EQ(g.num_arcs(), 1u);
}

TEST(Stats, PipelineMatchesModule) {
    const auto rows = fixture_rows();
    const auto dir = scratch("stats");
    const auto reports = stats_report(rows, 525, 0.05, dir);
    ASSERT_EQ(reports.size(), 2u);
    for (const auto& rep : reports) {
        EXPECT_EQ(rep.blocks, 9u);
        const auto dir_kind = rep.metric == "dhd" ? Direction::lower_better : Direction::higher_better;
        Eigen::MatrixXd m(9, 4);
        int b = 0;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            for (std::size_t t : {25u, 125u, 225u}) {
                for (const auto& r : rows) {
                    if (r.seed != seed || r.target_n != t) continue;
                    const auto it = std::find(rep.algorithms.begin(), rep.algorithms.end(), r.algorithm);
                    m(b, it - rep.algorithms.begin()) = rep.metric == "dhd" ? *r.dhd : r.test_loglik;
                }
                ++b;
            }
        }
        const auto f = friedman(m, dir_kind);
        EXPECT_NEAR(rep.friedman.statistic, f.statistic, 1e-12);
        const auto bh = bergmann_hommel(f.mean_ranks, 9, 0.05);
        EXPECT_EQ(rep.posthoc.rejected, bh.rejected);
        EXPECT_TRUE(fs::exists(dir / ("stats_" + rep.metric + ".json")));
        EXPECT_TRUE(fs::exists(dir / ("heatmap_" + rep.metric + ".csv")));
    }
    fs::remove_all(dir);
}

TEST(Stats, InsufficientBlocks) {
    auto rows = fixture_rows();
    try {
        stats_report(rows, 25, 0.05, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "insufficient-blocks");
    }
}

TEST(Plot, OneSeriesPerAlgorithm) {
    const auto dir = scratch("plot");
    const auto files = plot_results(fixture_rows(), dir);
    ASSERT_EQ(files.size(), 3u);
    const auto svg = slurp(dir / "toy_test_loglik.svg");
    std::size_t labels = 0;
    for (auto p = svg.find("class=\"series-label\""); p != std::string::npos;
         p = svg.find("class=\"series-label\"", p + 1))
        ++labels;
    EXPECT_EQ(labels, 4u);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("hc-tl"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Experiment, RowCountAndDeterminism) {
    ExperimentConfig cfg;
    cfg.spbn_id = 1;
    cfg.grid_start = 20;
    cfg.grid_step = 20;
    cfg.grid_end = 40;
    cfg.repeats = 2;
    cfg.source_n = 150;
    cfg.test_n = 60;
    cfg.algorithms = {"pc", "hc-tl"};
    cfg.max_sepset_size = 1;
    cfg.output = scratch("exp_a");
    const auto a = run_experiment(cfg);
    EXPECT_EQ(a.rows.size(), 2u * 2u * 2u);
    cfg.output = scratch("exp_b");
    const auto b = run_experiment(cfg);
    EXPECT_EQ(drop_last_column(slurp(a.results_csv)), drop_last_column(slurp(b.results_csv)));
    EXPECT_TRUE(fs::exists(cfg.output / "structures" / "spbn1_hc-tl_n20_r0.txt"));
    EXPECT_TRUE(fs::exists(cfg.output / "structures" / "spbn1_pc_n40_consensus.txt"));
    fs::remove_all(a.results_csv.parent_path());
    fs::remove_all(cfg.output);
}

TEST(Experiment, NoiseSourcesRun) {
    ExperimentConfig cfg;
    cfg.spbn_id = 3;
    cfg.grid_start = cfg.grid_end = 30;
    cfg.repeats = 1;
    cfg.source_kind = SourceKind::noise;
    cfg.source_n = 200;
    cfg.test_n = 50;
    cfg.algorithms = {"hc", "hc-tl"};
    cfg.write_structures = false;
    cfg.output = scratch("exp_noise");
    const auto out = run_experiment(cfg);
    ASSERT_EQ(out.rows.size(), 2u);
    fs::remove_all(cfg.output);
}
