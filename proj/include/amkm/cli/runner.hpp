#pragma once

#include <string>
#include <vector>

#include "amkm/cli/config.hpp"
#include "amkm/eval.hpp"

namespace amkm::cli {

/// `repeats` records (seed, seed+1, ...) plus one aggregate record whose
/// metrics are the means; the aggregate's method id carries a ":mean" suffix.
std::vector<ExperimentResult> run(const RunConfig& cfg);

/// One aggregate record per sweep value, in value order, constant seed base.
std::vector<ExperimentResult> sweep(const RunConfig& cfg);

/// Batch-append protocol: AMKM extends the fitted model per batch, the other
/// methods refit on the accumulated pool. One (repeat-averaged) record per
/// batch step.
std::vector<ExperimentResult> scalable(const RunConfig& cfg);

/// One aggregate record per method on identical splits (shared seed).
std::vector<ExperimentResult> compare(const RunConfig& cfg);

/// Serialize records in the configured format (fixed column order, see
/// csv_header()). Deterministic byte output given (config, seed) when
/// timing = false.
void write_results(const std::vector<ExperimentResult>& records, const RunConfig& cfg);

std::string csv_header();
std::string format_record_csv(const ExperimentResult& r);
std::string format_record_jsonl(const ExperimentResult& r);

}  // namespace amkm::cli
