#include "amkm/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace amkm::cli {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "method",
        "data.source",
        "data.csv.path",
        "data.csv.has_header",
        "data.csv.matching",
        "data.csv.reference",
        "data.split.n_matching",
        "data.split.n_reference",
        "data.synthetic.d",
        "data.synthetic.matching_mean",
        "data.synthetic.matching_sigma",
        "data.synthetic.reference_mean",
        "data.synthetic.reference_sigma",
        "data.synthetic.n_m",
        "data.synthetic.n_r",
        "kernel.policy",
        "kernel.sigma",
        "params.t",
        "params.n",
        "params.n_s",
        "params.n_h",
        "params.partitions",
        "params.lambda",
        "params.t_batch",
        "params.fusion",
        "params.fusion_reference",
        "standardize",
        "truth",
        "seed",
        "repeats",
        "timing",
        "output",
        "format",
        "sweep.axis",
        "sweep.values",
        "scalable.initial_reference",
        "scalable.batch_size",
        "scalable.batches",
        "compare.methods",
    };
    return keys;
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw std::invalid_argument(key + ": " + what);
}

class Reader {
public:
    explicit Reader(const KeyValues& kv) : kv_(kv) {}

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    bool flag(const std::string& key, bool fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        if (it->second == "true") return true;
        if (it->second == "false") return false;
        fail(key, "expected true or false, got '" + it->second + "'");
    }

    std::size_t count(const std::string& key, std::size_t fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
        if (ec != std::errc() || p != it->second.data() + it->second.size()) {
            fail(key, "expected a nonnegative integer, got '" + it->second + "'");
        }
        return v;
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
        if (ec != std::errc() || p != it->second.data() + it->second.size()) {
            fail(key, "expected an unsigned integer, got '" + it->second + "'");
        }
        return v;
    }

    double real(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        double v = 0;
        auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
        if (ec != std::errc() || p != it->second.data() + it->second.size() ||
            !std::isfinite(v)) {
            fail(key, "expected a finite real, got '" + it->second + "'");
        }
        return v;
    }

    std::vector<double> reals(const std::string& key, std::vector<double> fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            double v = 0;
            auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc() || p != item.data() + item.size() || !std::isfinite(v)) {
                fail(key, "expected comma-separated reals, got '" + it->second + "'");
            }
            out.push_back(v);
        }
        if (out.empty()) fail(key, "expected at least one value");
        return out;
    }

    std::vector<std::size_t> counts(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return {};
        std::vector<std::size_t> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            std::size_t v = 0;
            auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc() || p != item.data() + item.size()) {
                fail(key, "expected comma-separated integers, got '" + it->second + "'");
            }
            out.push_back(v);
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key,
                                     std::vector<std::string> fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        std::vector<std::string> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        if (out.empty()) fail(key, "expected at least one entry");
        return out;
    }

private:
    const KeyValues& kv_;
};

bool is_known_method(const std::string& m) {
    return m == "kmm" || m == "glokmm" || m == "amkm" || m == "enskmm";
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value', got '" + t + "'");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        }
        if (known_keys().count(key) == 0) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        }
        kv[key] = value;
    }
    return kv;
}

KeyValues load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(KeyValues& kv, const std::string& assignment) {
    std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("--set expects key=value, got '" + assignment + "'");
    }
    std::string key = trim(assignment.substr(0, eq));
    if (known_keys().count(key) == 0) {
        throw std::invalid_argument("--set: unknown key '" + key + "'");
    }
    kv[key] = trim(assignment.substr(eq + 1));
}

std::string dump_config(const KeyValues& kv) {
    std::string out;
    for (const auto& [key, value] : kv) {
        out += key;
        out += " = ";
        out += value;
        out += "\n";
    }
    return out;
}

const char* to_string(TruthMode mode) {
    return mode == TruthMode::analytic ? "analytic" : "full-kmm-oracle";
}

RunConfig make_run_config(const KeyValues& kv) {
    Reader r(kv);
    RunConfig cfg;

    cfg.method = r.str("method", cfg.method);
    if (!is_known_method(cfg.method)) {
        fail("method", "must be one of kmm|glokmm|amkm|enskmm, got '" + cfg.method + "'");
    }

    std::string source = r.str("data.source", "synthetic");
    if (source == "synthetic") {
        cfg.source = DataSource::synthetic;
    } else if (source == "csv") {
        cfg.source = DataSource::csv;
    } else {
        fail("data.source", "must be synthetic or csv, got '" + source + "'");
    }

    bool has_csv = r.has("data.csv.path") || r.has("data.csv.matching");
    bool has_synth = r.has("data.synthetic.n_m") || r.has("data.synthetic.n_r") ||
                     r.has("data.synthetic.d");
    if (cfg.source == DataSource::csv && has_synth) {
        fail("data.source", "csv source given but data.synthetic.* keys are set");
    }
    if (cfg.source == DataSource::synthetic && has_csv) {
        fail("data.source", "synthetic source given but data.csv.* keys are set");
    }

    if (cfg.source == DataSource::csv) {
        cfg.csv_path = r.str("data.csv.path", "");
        cfg.csv_has_header = r.flag("data.csv.has_header", false);
        cfg.csv_matching_path = r.str("data.csv.matching", "");
        cfg.csv_reference_path = r.str("data.csv.reference", "");
        bool single = !cfg.csv_path.empty();
        bool pair = !cfg.csv_matching_path.empty() || !cfg.csv_reference_path.empty();
        if (single == pair) {
            fail("data.csv.path",
                 "exactly one of data.csv.path or data.csv.matching+data.csv.reference required");
        }
        if (pair && (cfg.csv_matching_path.empty() || cfg.csv_reference_path.empty())) {
            fail("data.csv.matching", "both data.csv.matching and data.csv.reference required");
        }
        if (single) {
            cfg.n_matching = r.count("data.split.n_matching", 0);
            cfg.n_reference = r.count("data.split.n_reference", 0);
            if (cfg.n_matching < 1) fail("data.split.n_matching", "must be >= 1");
            if (cfg.n_reference < 1) fail("data.split.n_reference", "must be >= 1");
        }
    } else {
        cfg.synth.d = r.count("data.synthetic.d", 1);
        if (cfg.synth.d < 1) fail("data.synthetic.d", "must be >= 1");
        cfg.synth.matching_mean = r.reals("data.synthetic.matching_mean", {0.0});
        cfg.synth.matching_sigma = r.reals("data.synthetic.matching_sigma", {1.0});
        cfg.synth.reference_mean = r.reals("data.synthetic.reference_mean", {0.0});
        cfg.synth.reference_sigma = r.reals("data.synthetic.reference_sigma", {1.0});
        cfg.synth.n_m = r.count("data.synthetic.n_m", 100);
        cfg.synth.n_r = r.count("data.synthetic.n_r", 1000);
        if (cfg.synth.n_m < 1) fail("data.synthetic.n_m", "must be >= 1");
        if (cfg.synth.n_r < 1) fail("data.synthetic.n_r", "must be >= 1");
        for (const char* key :
             {"data.synthetic.matching_sigma", "data.synthetic.reference_sigma"}) {
            for (double s : r.reals(key, {1.0})) {
                if (s <= 0.0) fail(key, "sigmas must be > 0");
            }
        }
    }

    std::string policy = r.str("kernel.policy", "median");
    if (policy == "median") {
        cfg.kernel = KernelConfig::median();
        if (r.has("kernel.sigma")) {
            fail("kernel.sigma", "not allowed with kernel.policy = median");
        }
    } else if (policy == "fixed") {
        double sigma = r.real("kernel.sigma", 0.0);
        if (sigma <= 0.0) fail("kernel.sigma", "must be > 0 with kernel.policy = fixed");
        cfg.kernel = KernelConfig::fixed(sigma);
    } else {
        fail("kernel.policy", "must be median or fixed, got '" + policy + "'");
    }

    cfg.params.t = r.count("params.t", cfg.params.t);
    cfg.params.n = r.count("params.n", cfg.params.n);
    cfg.params.n_s = r.count("params.n_s", cfg.params.n_s);
    cfg.params.n_h = r.count("params.n_h", cfg.params.n_h);
    cfg.params.partitions = r.count("params.partitions", cfg.params.partitions);
    cfg.params.lambda = r.real("params.lambda", cfg.params.lambda);
    cfg.params.t_batch = r.count("params.t_batch", cfg.params.t_batch);
    if (cfg.params.t < 1) fail("params.t", "must be >= 1");
    if (cfg.params.n < 1) fail("params.n", "must be >= 1");
    if (cfg.params.n_s < 1) fail("params.n_s", "must be >= 1");
    if (cfg.params.n_h < 1) fail("params.n_h", "must be >= 1");
    if (cfg.params.partitions < 1) fail("params.partitions", "must be >= 1");
    if (cfg.params.lambda < 0.0) fail("params.lambda", "must be >= 0");
    if (cfg.params.t_batch < 1) fail("params.t_batch", "must be >= 1");

    std::string fusion = r.str("params.fusion", "separable");
    if (fusion == "separable") {
        cfg.params.fusion = FusionForm::separable;
    } else if (fusion == "coupled") {
        cfg.params.fusion = FusionForm::coupled;
    } else {
        fail("params.fusion", "must be separable or coupled, got '" + fusion + "'");
    }
    std::string fref = r.str("params.fusion_reference", "subset");
    if (fref == "subset") {
        cfg.params.fusion_reference = FusionReference::subset;
    } else if (fref == "full") {
        cfg.params.fusion_reference = FusionReference::full;
    } else {
        fail("params.fusion_reference", "must be subset or full, got '" + fref + "'");
    }

    cfg.standardize = r.flag("standardize", false);

    std::string truth = r.str("truth", "auto");
    if (truth == "auto") {
        cfg.truth_is_auto = true;
        cfg.truth =
            cfg.source == DataSource::synthetic ? TruthMode::analytic : TruthMode::full_kmm_oracle;
    } else if (truth == "analytic") {
        cfg.truth_is_auto = false;
        cfg.truth = TruthMode::analytic;
        if (cfg.source == DataSource::csv) {
            fail("truth", "analytic truth requires a synthetic data source");
        }
    } else if (truth == "full-kmm-oracle") {
        cfg.truth_is_auto = false;
        cfg.truth = TruthMode::full_kmm_oracle;
    } else {
        fail("truth", "must be auto, analytic or full-kmm-oracle, got '" + truth + "'");
    }

    cfg.seed = r.u64("seed", 0);
    cfg.repeats = r.count("repeats", 5);
    if (cfg.repeats < 1) fail("repeats", "must be >= 1");
    cfg.timing = r.flag("timing", true);

    cfg.output = r.str("output", "");
    std::string format = r.str("format", "csv");
    if (format == "csv") {
        cfg.format = OutputFormat::csv;
    } else if (format == "jsonl") {
        cfg.format = OutputFormat::jsonl;
    } else {
        fail("format", "must be csv or jsonl, got '" + format + "'");
    }

    cfg.sweep_axis = r.str("sweep.axis", "");
    cfg.sweep_values = r.counts("sweep.values");
    if (!cfg.sweep_axis.empty()) {
        static const std::set<std::string> axes{"n_m", "n_r", "n", "n_s", "n_h", "partitions"};
        if (axes.count(cfg.sweep_axis) == 0) {
            fail("sweep.axis", "must be one of n_m|n_r|n|n_s|n_h|partitions");
        }
    }

    cfg.scalable_initial = r.count("scalable.initial_reference", cfg.scalable_initial);
    cfg.scalable_batch = r.count("scalable.batch_size", cfg.scalable_batch);
    cfg.scalable_batches = r.count("scalable.batches", cfg.scalable_batches);

    cfg.compare_methods = r.strings("compare.methods", cfg.compare_methods);
    for (const auto& m : cfg.compare_methods) {
        if (!is_known_method(m)) {
            fail("compare.methods", "unknown method '" + m + "'");
        }
    }

    return cfg;
}

}  // namespace amkm::cli
