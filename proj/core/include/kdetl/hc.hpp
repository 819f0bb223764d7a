#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kdetl/dataset.hpp"
#include "kdetl/graph.hpp"
#include "kdetl/kde.hpp"
#include "kdetl/rng.hpp"
#include "kdetl/transfer.hpp"

namespace kdetl {

struct HcConfig {
    std::size_t k_folds = 5;
    std::size_t patience = 3;
    std::size_t tabu_size = 5;
    std::optional<std::size_t> max_indegree;
    Seed seed{};
};

// Fold plan used by hc and hc_tl for a given config and target size.
FoldPlan hc_folds(std::size_t n, const HcConfig& cfg);

/// Decomposable score: the graph score is the sum of node terms.
class LocalScore {
  public:
    virtual ~LocalScore() = default;
    virtual const NodeSet& nodes() const = 0;
    // `parents` sorted ascending.
    virtual double score(int node, const std::vector<int>& parents) = 0;
    // Free-form per-graph annotation for the move trace.
    virtual std::string annotate(const Dag&) { return {}; }
};

/// k-fold cross-validated CKDE log-likelihood with per-(node, parents) memo.
class CvScore : public LocalScore {
  public:
    CvScore(const Dataset& data, FoldPlan folds);

    const NodeSet& nodes() const override { return nodes_; }
    double score(int node, const std::vector<int>& parents) override;
    // Held-out log-likelihood of each fold; -inf when a training fold is too
    // small for the family.
    const std::vector<double>& fold_terms(int node, const std::vector<int>& parents);
    void clear() { cache_.clear(); }

  private:
    const Dataset& data_;
    NodeSet nodes_;
    FoldPlan folds_;
    std::vector<RowIndices> training_;
    std::map<std::pair<int, std::vector<int>>, std::vector<double>> cache_;
};

struct CvTlDetail {
    std::vector<double> target_terms;
    std::vector<double> source_terms;  // weighted over sources, per fold
    std::vector<double> weights;       // per source
    double target_total = 0.0;
    double source_total = 0.0;
    double risk = 0.0;
    bool blended = false;
    double score = 0.0;
};

/// Transfer score: per fold, eta * target term + (1 - eta) * weighted source
/// term, where each source CPD is fitted on the full source and evaluated on
/// the fold's target rows. Falls back to the target term when the risk
/// |sum target| - |sum source| is not positive, no source carries weight, or
/// eta is 1.
class CvTlScore : public LocalScore {
  public:
    CvTlScore(const TransferContext& ctx, FoldPlan folds);

    const NodeSet& nodes() const override { return target_.nodes(); }
    double score(int node, const std::vector<int>& parents) override { return detail(node, parents).score; }
    const CvTlDetail& detail(int node, const std::vector<int>& parents);
    std::string annotate(const Dag& g) override;
    void clear();

  private:
    const Eigen::VectorXd& source_rows(std::size_t source, int node, const std::vector<int>& parents);

    const TransferContext& ctx_;
    CvScore target_;
    FoldPlan folds_;
    std::map<std::pair<int, std::vector<int>>, CvTlDetail> cache_;
    std::map<std::tuple<std::size_t, int, std::vector<int>>, Eigen::VectorXd> source_cache_;
};

double cv_score(const Dataset& data, const Dag& g, int node, const FoldPlan& folds);
double cv_score(const Dataset& data, const Dag& g, const FoldPlan& folds);
double cvtl_score(const TransferContext& ctx, const Dag& g, int node, const FoldPlan& folds);

struct HcStep {
    std::size_t iteration = 0;
    Move move;
    double delta = 0.0;
    double score = 0.0;  // graph score after the move
    bool improved = false;
    std::string note;
};

struct HcResult {
    Dag dag;  // best graph visited
    double score = 0.0;
    double start_score = 0.0;
    std::vector<HcStep> trace;
};

/// Greedy search over add/remove/flip. The best non-tabu move is applied
/// even when it does not improve; the search stops once the number of
/// consecutive steps without a new best exceeds the patience.
HcResult hill_climb(LocalScore& score, const Dag& start, const HcConfig& cfg);

HcResult hc_run(const Dataset& data, const HcConfig& cfg);
Dag hc(const Dataset& data, const HcConfig& cfg);
// Falls back to hc on the target when the context has no kept source.
HcResult hc_tl_run(const TransferContext& ctx, const HcConfig& cfg);
Dag hc_tl(const TransferContext& ctx, const HcConfig& cfg);

void write_move_trace(const HcResult& result, const NodeSet& nodes, const std::filesystem::path& path);

}  // namespace kdetl
