#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kdetl/rng.hpp"

namespace kdetl {

using RowIndices = std::vector<std::size_t>;

/// Column-labelled matrix of continuous observations (N rows x n variables).
///
/// Storage is column-major because every consumer (KDE fits, CI tests,
/// divergences) scans whole variables. Entries are finite and names unique;
/// the constructor enforces both. Immutable after construction.
class Dataset {
  public:
    Dataset(std::vector<std::string> names, Eigen::MatrixXd values);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }

    const std::vector<std::string>& names() const noexcept { return names_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    auto column(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }

    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;

    // Submatrix of the given rows/columns, in the order given.
    Eigen::MatrixXd gather(std::span<const std::size_t> rows, std::span<const int> cols) const;
    Eigen::MatrixXd gather(std::span<const int> cols) const;

    Dataset select_rows(std::span<const std::size_t> rows) const;
    Dataset head(std::size_t n) const;
    // Same data with columns permuted to match `names` exactly.
    Dataset reorder(const std::vector<std::string>& names) const;

  private:
    std::vector<std::string> names_;
    Eigen::MatrixXd values_;
};

// Header row required. Rows with any empty, non-numeric or non-finite cell
// are dropped.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text);
void write_csv(const Dataset& data, const std::filesystem::path& path);
std::string to_csv(const Dataset& data);

/// k disjoint index sets covering 0..N-1; sizes differ by at most one.
struct FoldPlan {
    std::size_t k = 0;
    std::vector<RowIndices> folds;

    // Indices outside fold m, ascending.
    RowIndices training_rows(std::size_t m) const;
};

FoldPlan kfold_indices(std::size_t n, std::size_t k, Seed seed);

std::pair<Dataset, Dataset> holdout_split(const Dataset& data, std::size_t test_n, Seed seed);

RowIndices all_rows(std::size_t n);

}  // namespace kdetl
