#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "kdetl/experiment.hpp"
#include "kdetl/stats.hpp"

namespace kdetl {

struct SeriesPoint {
    double x = 0.0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, 0 for a single value
};

struct Series {
    std::string label;
    std::vector<SeriesPoint> points;
};

// Mean and sample standard deviation of `metric` per (algorithm, target_n)
// for one dataset. metric is test_loglik, dhd, shd or wall_time_s.
std::vector<Series> summarize(const std::vector<ResultRow>& rows, const std::string& dataset,
                              const std::string& metric);

// Self-contained SVG line chart with +-1 sd bands.
std::string render_svg(const std::vector<Series>& series, const std::string& title, const std::string& y_label);

// One SVG per (dataset, metric) under `dir`; returns the files written.
std::vector<std::filesystem::path> plot_results(const std::vector<ResultRow>& rows, const std::filesystem::path& dir);

struct MetricReport {
    std::string metric;
    std::vector<std::string> algorithms;
    std::size_t blocks = 0;
    FriedmanResult friedman;
    PairwiseResult posthoc;
    std::vector<std::vector<int>> groups;
};

/// Friedman + Bergmann-Hommel on DHD (lower is better) and test
/// log-likelihood (higher is better), over blocks (dataset, target_n, seed)
/// with target_n < max_target_n. Writes stats_<metric>.json and
/// heatmap_<metric>.csv under `dir` when it is non-empty.
std::vector<MetricReport> stats_report(const std::vector<ResultRow>& rows, std::size_t max_target_n, double alpha,
                                       const std::filesystem::path& dir);

}  // namespace kdetl
