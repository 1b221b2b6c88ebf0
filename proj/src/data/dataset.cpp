#include "amkm/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "amkm/rng.hpp"

namespace amkm {
namespace {

std::string position(std::size_t row, std::size_t col) {
    return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

// Split one CSV line on commas. Empty cells stay as empty strings so the
// numeric parser can point at them.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_field(const std::string& field, std::size_t row, std::size_t col) {
    std::size_t begin = field.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        throw std::runtime_error("CSV: empty field at " + position(row, col));
    }
    std::size_t end = field.find_last_not_of(" \t\r") + 1;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data() + begin, field.data() + end, value);
    if (ec != std::errc() || ptr != field.data() + end) {
        throw std::runtime_error("CSV: non-numeric field '" + field.substr(begin, end - begin) +
                                 "' at " + position(row, col));
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error("CSV: non-finite value at " + position(row, col));
    }
    return value;
}

}  // namespace

Dataset load_dataset(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_dataset: cannot open '" + path + "'");
    }

    std::string line;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    std::vector<std::string> names;
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (header_pending) {
            header_pending = false;
            names = fields;
            cols = fields.size();
            continue;
        }
        if (cols == 0) {
            cols = fields.size();
        } else if (fields.size() != cols) {
            throw std::runtime_error("CSV: ragged row at row " + std::to_string(line_no) +
                                     " (expected " + std::to_string(cols) + " fields, got " +
                                     std::to_string(fields.size()) + ")");
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            values.push_back(parse_field(fields[c], line_no, c + 1));
        }
        ++rows;
    }
    if (rows == 0) {
        throw std::runtime_error("CSV: no data rows in '" + path + "'");
    }

    Dataset ds;
    ds.instances = Matrix(rows, cols, std::move(values));
    ds.feature_names = std::move(names);
    ds.source = path;
    return ds;
}

Dataset standardize(const Dataset& ds) {
    const std::size_t n = ds.n();
    const std::size_t d = ds.d();
    if (n < 2) {
        throw std::invalid_argument("standardize: needs at least 2 instances");
    }

    std::vector<double> mean(d, 0.0);
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = ds.instances.row(i);
        for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
    }
    for (std::size_t c = 0; c < d; ++c) mean[c] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = ds.instances.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            double diff = row[c] - mean[c];
            var[c] += diff * diff;
        }
    }

    // Population convention: divisor n.
    std::vector<double> inv_sd(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double sd = std::sqrt(var[c] / static_cast<double>(n));
        inv_sd[c] = sd > 0.0 ? 1.0 / sd : 0.0;  // constant columns map to zero
    }

    Dataset out;
    out.instances = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto src = ds.instances.row(i);
        auto dst = out.instances.row(i);
        for (std::size_t c = 0; c < d; ++c) dst[c] = (src[c] - mean[c]) * inv_sd[c];
    }
    out.feature_names = ds.feature_names;
    out.source = ds.source;
    return out;
}

std::pair<Dataset, Dataset> split_match_reference(const Dataset& ds, const SplitSpec& spec) {
    if (spec.n_matching < 1 || spec.n_reference < 1) {
        throw std::invalid_argument("split_match_reference: both subset sizes must be >= 1");
    }
    if (spec.n_matching + spec.n_reference > ds.n()) {
        throw std::invalid_argument(
            "split_match_reference: requested " + std::to_string(spec.n_matching) + " + " +
            std::to_string(spec.n_reference) + " rows from a dataset of " + std::to_string(ds.n()));
    }

    Rng rng(spec.seed);
    auto idx = rng.sample_without_replacement(ds.n(), spec.n_matching + spec.n_reference);
    std::span<const std::size_t> match_idx(idx.data(), spec.n_matching);
    std::span<const std::size_t> ref_idx(idx.data() + spec.n_matching, spec.n_reference);

    Dataset matching{ds.instances.take_rows(match_idx), ds.feature_names, ds.source + "#matching"};
    Dataset reference{ds.instances.take_rows(ref_idx), ds.feature_names, ds.source + "#reference"};
    return {std::move(matching), std::move(reference)};
}

Dataset ReferencePool::flatten() const {
    Dataset out;
    out.source = "pool";
    for (const auto& b : batches_) {
        out.instances.append_rows(b.instances);
        if (out.feature_names.empty()) out.feature_names = b.feature_names;
    }
    return out;
}

ReferencePool append_batch(ReferencePool pool, Dataset batch) {
    if (batch.n() == 0) {
        throw std::invalid_argument("append_batch: empty batch");
    }
    if (!pool.batches_.empty() && batch.d() != pool.dim_) {
        throw std::invalid_argument("append_batch: batch dimensionality " +
                                    std::to_string(batch.d()) + " does not match pool " +
                                    std::to_string(pool.dim_));
    }
    pool.dim_ = batch.d();
    pool.total_ += batch.n();
    pool.batches_.push_back(std::move(batch));
    return pool;
}

}  // namespace amkm
