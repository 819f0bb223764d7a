#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kdetl/dataset.hpp"
#include "kdetl/graph.hpp"
#include "kdetl/synthetic.hpp"

namespace kdetl {

enum class NetworkKind { spbn, lgbn, csv };
enum class SourceKind { network, noise };

/// Declarative experiment description. Text form is one `key = value` per
/// line; see README for the key set.
struct ExperimentConfig {
    NetworkKind network_kind = NetworkKind::spbn;
    int spbn_id = 1;
    std::filesystem::path network_path;
    std::string dataset;  // defaults to spbn<id> or the file stem

    std::vector<double> sources{0.0, 0.10};  // modified-arc fractions
    SourceKind source_kind = SourceKind::network;
    std::vector<std::filesystem::path> sources_csv;
    std::size_t source_n = 3000;
    double noise_mean = 0.0;
    double noise_std = 1.0;
    double noise_source_std = 10.0;

    std::size_t grid_start = 25;
    std::size_t grid_step = 100;
    std::size_t grid_end = 1025;
    std::size_t test_n = 1024;
    std::size_t repeats = 3;
    std::vector<std::string> algorithms{"pc", "pcs-tl", "hc", "hc-tl"};
    std::uint64_t seed = 1;
    std::filesystem::path output = "results";

    double alpha = 0.05;
    std::optional<std::size_t> max_sepset_size = 5;
    std::size_t k_folds = 5;
    std::size_t patience = 3;
    std::optional<std::size_t> max_indegree = 5;
    std::size_t reference_n = 10000;
    bool write_structures = true;

    void validate() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Applies one `key=value` override.
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

// Inclusive grid start, start+step, ... <= end.
std::vector<std::size_t> grid_points(const ExperimentConfig& cfg);

struct ResultRow {
    std::string dataset;
    std::string algorithm;
    std::size_t target_n = 0;
    std::uint64_t seed = 0;
    double test_loglik = 0.0;
    std::optional<std::size_t> shd;
    std::optional<double> dhd;
    double wall_time_s = 0.0;
};

inline constexpr std::string_view kResultsHeader = "dataset,algorithm,target_n,seed,test_loglik,shd,dhd,wall_time_s";

std::string format_results(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results(std::string_view text);
void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
std::vector<ResultRow> read_results(const std::filesystem::path& path);

bool is_transfer_algorithm(std::string_view algorithm);
bool is_pc_family(std::string_view algorithm);

struct ExperimentOutput {
    std::vector<ResultRow> rows;
    std::filesystem::path results_csv;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the full protocol: per repeat, sample (or split) target and test
/// data and build the sources; per grid point and algorithm, learn the
/// structure and parameters and record test log-likelihood, SHD, DHD and
/// wall time. Writes <output>/results.csv plus per-seed and consensus
/// structures.
ExperimentOutput run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// Reference structure for a learner family ("pc" or "hc"): the generating
/// DAG for network sources, otherwise a DAG learned on up to reference_n
/// rows and cached under <output>/reference_<family>.txt.
Dag reference_structure(const ExperimentConfig& cfg, std::string_view family, const ProgressFn& progress = {});

// Arcs present in more than half of `graphs`, most frequent first, skipping
// any that would close a cycle.
Dag consensus_graph(const std::vector<Dag>& graphs);

// Network named by the config (synthetic or linear-Gaussian file).
StructuralNetwork config_network(const ExperimentConfig& cfg);

}  // namespace kdetl
