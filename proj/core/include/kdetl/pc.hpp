#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "kdetl/dataset.hpp"
#include "kdetl/graph.hpp"
#include "kdetl/rcot.hpp"
#include "kdetl/transfer.hpp"

namespace kdetl {

struct PcConfig {
    double alpha = 0.05;
    std::optional<std::size_t> max_sepset_size;
    RcotConfig rcot;
};

struct PcResult {
    Pdag skeleton;  // undirected, after the adjacency phase
    Pdag pdag;      // after v-structures and Meek rules
    Dag dag;
    SepsetTable sepsets;
    std::size_t num_tests = 0;
};

/// PC-stable: adjacency sets are frozen at the start of each sepset size and
/// removals applied at its end; v-structures by majority vote over candidate
/// separating sets (ties leave the triple unoriented); Meek rules; extension
/// to a DAG.
PcResult pc_stable_run(CiTest& ci, const PcConfig& cfg);
Dag pc_stable(CiTest& ci, const PcConfig& cfg);
Dag pc_stable(const Dataset& data, const PcConfig& cfg);

struct PooledPValueTrace {
    std::string x;
    std::string y;
    std::vector<std::string> z;
    double target_p = 1.0;
    std::vector<double> source_p;  // NaN for sources not consulted
    std::vector<double> weights;
    double pooled = 1.0;
};

/// Combines a target p-value with source p-values. `psi_weights` is the
/// per-source relatedness (zero disables a source); each is halved when the
/// source's decision at `alpha` disagrees with the target's, then the set is
/// renormalized. Returns eta * pt + (1 - eta) * sum w * ps, or pt when every
/// weight is zero.
PooledPValueTrace pool_pvalues(double target_p, const std::vector<double>& source_p,
                               const std::vector<double>& psi_weights, double eta, double alpha);

/// CI test whose p-values pool the target with every kept source. Target and
/// sources share one feature seed per query.
class PooledCiTest : public CiTest {
  public:
    PooledCiTest(const TransferContext& ctx, const PcConfig& cfg);

    const NodeSet& nodes() const override { return nodes_; }
    double pvalue(int x, int y, std::span<const int> z) override;
    PooledPValueTrace query(int x, int y, std::span<const int> z);

    // Every distinct query, in first-evaluation order.
    std::vector<PooledPValueTrace> trace() const;

  private:
    const TransferContext& ctx_;
    PcConfig cfg_;
    NodeSet nodes_;
    RcotTest target_;
    std::vector<std::unique_ptr<RcotTest>> sources_;
    mutable std::mutex mutex_;
    std::vector<PooledPValueTrace> trace_;
    std::map<std::tuple<int, int, std::vector<int>>, std::size_t> seen_;
};

// Falls back to PC-stable on the target when the context has no kept source.
Dag pcs_tl(const TransferContext& ctx, const PcConfig& cfg, std::vector<PooledPValueTrace>* trace = nullptr);

void write_pvalue_trace(const std::vector<PooledPValueTrace>& trace, const std::filesystem::path& path);

/// Exact CI oracle: p = 1 when x and y are d-separated by z in `dag`, else 0.
class DSeparationOracle : public CiTest {
  public:
    explicit DSeparationOracle(Dag dag) : dag_(std::move(dag)) {}
    const NodeSet& nodes() const override { return dag_.nodes(); }
    double pvalue(int x, int y, std::span<const int> z) override {
        ++calls_;
        return d_separated(dag_, x, y, z) ? 1.0 : 0.0;
    }
    std::size_t calls() const noexcept { return calls_; }

  private:
    Dag dag_;
    std::size_t calls_ = 0;
};

}  // namespace kdetl
