#pragma once

#include <map>
#include <string>
#include <vector>

#include "amkm/eval.hpp"
#include "amkm/kernel.hpp"
#include "amkm/matchers.hpp"

namespace amkm::cli {

/// Flat dotted-key configuration: one `key = value` per line, `#` comment
/// lines, later assignments win. dump_config() round-trips through
/// parse_config_text().
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_config_text(const std::string& text);
KeyValues load_config_file(const std::string& path);
/// Apply one `key=value` override (the CLI's --set).
void apply_override(KeyValues& kv, const std::string& assignment);
std::string dump_config(const KeyValues& kv);

enum class DataSource { synthetic, csv };
enum class TruthMode { analytic, full_kmm_oracle };
enum class OutputFormat { csv, jsonl };

struct RunConfig {
    std::string method = "kmm";

    DataSource source = DataSource::synthetic;
    // csv single-file mode (split by n_matching/n_reference) ...
    std::string csv_path;
    bool csv_has_header = false;
    // ... or pre-split mode
    std::string csv_matching_path;
    std::string csv_reference_path;
    std::size_t n_matching = 0;
    std::size_t n_reference = 0;

    SyntheticShiftSpec synth;

    KernelConfig kernel = KernelConfig::median();
    MatchParams params;
    bool standardize = false;
    TruthMode truth = TruthMode::analytic;
    bool truth_is_auto = true;  // auto: analytic for synthetic, oracle for csv
    std::uint64_t seed = 0;
    std::size_t repeats = 5;
    bool timing = true;

    std::string output;
    OutputFormat format = OutputFormat::csv;

    std::string sweep_axis;
    std::vector<std::size_t> sweep_values;

    std::size_t scalable_initial = 3000;
    std::size_t scalable_batch = 500;
    std::size_t scalable_batches = 8;

    std::vector<std::string> compare_methods{"kmm", "glokmm", "amkm", "enskmm"};
};

/// Typed validation of the key-value map; unknown keys and bad values are
/// reported with their key name.
RunConfig make_run_config(const KeyValues& kv);

const char* to_string(TruthMode mode);

}  // namespace amkm::cli
