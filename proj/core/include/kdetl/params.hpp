#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "kdetl/dataset.hpp"
#include "kdetl/graph.hpp"
#include "kdetl/kde.hpp"
#include "kdetl/rng.hpp"
#include "kdetl/transfer.hpp"

namespace kdetl {

KdeBayesianNetwork fit_kdebn(const Dag& g, const Dataset& data);

struct TlNodeCpd {
    CkdeCpd target;
    std::vector<std::size_t> source_ids;  // indices into the context's sources
    std::vector<CkdeCpd> sources;
    std::vector<double> weights;           // one per entry of `sources`, summing to 1
};

/// Log-linear pooling of a target network with source networks sharing its
/// structure: log f = eta log f_T + (1 - eta) sum_s w_s log f_s per node.
/// The pooled conditional is left unnormalized.
struct TlKdeBayesianNetwork {
    Dag dag;
    double eta = 1.0;
    std::vector<TlNodeCpd> nodes;
};

TlKdeBayesianNetwork fit_tl_kdebn(const Dag& g, const TransferContext& ctx);

// Target-only view: a pooled network with no sources.
TlKdeBayesianNetwork as_tl(KdeBayesianNetwork bn);

struct TlEvalOptions {
    // Divide each pooled conditional by a Monte-Carlo estimate of its
    // normalizer (uniform draws over the child's padded training range).
    bool normalize = false;
    std::size_t mc_samples = 256;
    Seed seed{};
};

Eigen::VectorXd tl_node_logpdf(const TlKdeBayesianNetwork& net, int node, const Dataset& data,
                               const TlEvalOptions& opts = {});
// Per-row sums over nodes.
Eigen::VectorXd tl_logpdf(const TlKdeBayesianNetwork& net, const Dataset& data, const TlEvalOptions& opts = {});
double tl_loglik(const TlKdeBayesianNetwork& net, const Dataset& data, const TlEvalOptions& opts = {});

/// Bundle directory layout:
///   graph.txt                  graph text format
///   manifest.json              eta, node order, per-node files and weights
///   cpd/<i>_training.bin       joint training matrix of node i
///   cpd/<i>_bandwidth.bin      joint bandwidth
///   cpd/<i>_marginal.bin       parent bandwidth (absent without parents)
///   source_<s>/cpd/...         same files for source CPDs
/// Each .bin file is uint64 rows, uint64 cols, then rows*cols float64 values
/// in row-major order, all little-endian.
void save_bundle(const TlKdeBayesianNetwork& net, const std::filesystem::path& dir);
TlKdeBayesianNetwork load_bundle(const std::filesystem::path& dir);

void write_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

}  // namespace kdetl
