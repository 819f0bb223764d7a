#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kdetl/dataset.hpp"

namespace kdetl {

/// Jensen-Shannon divergence (nats) between 1-D KDEs fitted to each sample.
/// Trapezoid quadrature over the union of two 512-point grids, each spanning
/// one sample's range widened by 3 kernel standard deviations of the wider
/// kernel. Result clamped to [0, ln 2].
double js_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Linear interpolation between order statistics ("type 7").
double quantile_type7(std::vector<double> values, double prob);

inline constexpr double kPsiCap = 1e12;

// 1/u for u <= Q3 + 1.5 IQR, else 0. u == 0 maps to kPsiCap.
std::vector<double> psi(const std::vector<double>& values);

// Scales to unit sum; all zeros stay all zeros.
std::vector<double> normalize_weights(std::vector<double> weights);

/// Target data, its auxiliary sources, and the cached per-variable JS
/// divergences between them. Immutable once built.
class TransferContext {
  public:
    // Sources are reordered to the target's column order.
    static TransferContext build(Dataset target, std::vector<Dataset> sources);
    // Uses a precomputed [source x variable] JS matrix.
    TransferContext(Dataset target, std::vector<Dataset> sources, Eigen::MatrixXd per_variable_js);

    const Dataset& target() const noexcept { return target_; }
    const std::vector<Dataset>& sources() const noexcept { return sources_; }
    std::size_t num_sources() const noexcept { return sources_.size(); }
    const Eigen::MatrixXd& per_variable_js() const noexcept { return js_; }

    double sjs(std::size_t source, std::span<const int> vars) const;
    double sjs(std::size_t source, const std::vector<std::string>& vars) const;

    // Sources whose full-variable SJS survives the psi gate.
    const std::vector<std::size_t>& kept() const noexcept { return kept_; }
    bool enabled() const noexcept { return !kept_.empty(); }
    double eta() const noexcept { return eta_; }
    // Copy with eta overridden (clamped to (0, 1]).
    TransferContext with_eta(double eta) const;

    /// One weight per source: psi of SJS over `vars` among the kept sources,
    /// normalized; zero for sources outside the kept set.
    std::vector<double> source_weights(std::span<const int> vars) const;

  private:
    void finalize();

    Dataset target_;
    std::vector<Dataset> sources_;
    Eigen::MatrixXd js_;
    std::vector<std::size_t> kept_;
    double eta_ = 1.0;
};

}  // namespace kdetl
