#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amkm/matrix.hpp"

namespace amkm {

/// Dense real-valued instance matrix (rows = instances) with provenance.
/// Ingestion guarantees all values are finite and all rows share one
/// dimensionality.
struct Dataset {
    Matrix instances;
    std::vector<std::string> feature_names;  // empty, or one label per column
    std::string source;

    std::size_t n() const { return instances.rows(); }
    std::size_t d() const { return instances.cols(); }
};

/// How to split one dataset into disjoint matching and reference subsets.
struct SplitSpec {
    std::size_t n_matching = 0;
    std::size_t n_reference = 0;
    std::uint64_t seed = 0;
};

/// Ordered batches of reference instances sharing one dimensionality.
/// Blocks are immutable once appended; flattening reproduces insertion order.
class ReferencePool {
public:
    ReferencePool() = default;

    const std::vector<Dataset>& batches() const { return batches_; }
    std::size_t total() const { return total_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return batches_.empty(); }

    /// Concatenate all batches, preserving insertion order.
    Dataset flatten() const;

    friend ReferencePool append_batch(ReferencePool pool, Dataset batch);

private:
    std::vector<Dataset> batches_;
    std::size_t total_ = 0;
    std::size_t dim_ = 0;
};

/// Parse a CSV file (UTF-8, comma separator, decimal-point floats, no
/// quoting). With has_header the first row is consumed into feature_names.
/// Ragged rows, non-numeric or non-finite fields, and empty files are
/// reported with their row/column position (1-based, counting the header).
Dataset load_dataset(const std::string& path, bool has_header);

/// Center each column to mean 0 and scale non-constant columns to standard
/// deviation 1 under the population convention (divisor n). Constant columns
/// become all-zero. Requires n >= 2.
Dataset standardize(const Dataset& ds);

/// Sample disjoint matching/reference row subsets without replacement.
/// Deterministic in spec.seed (see kRngAlgorithm).
std::pair<Dataset, Dataset> split_match_reference(const Dataset& ds, const SplitSpec& spec);

/// Store `batch` as a new block. The batch dimensionality must match the
/// pool's (any dimensionality starts an empty pool).
ReferencePool append_batch(ReferencePool pool, Dataset batch);

}  // namespace amkm
