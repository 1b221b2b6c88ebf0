#include "amkm/cli/runner.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "amkm/dataset.hpp"

namespace amkm::cli {
namespace {

constexpr double kOracleLambda = 1e-3;  // truth construction, independent of params.lambda

struct PreparedData {
    Dataset matching;
    Dataset reference;
    std::vector<double> truth;  // on the matching rows
    KernelConfig kernel;        // resolved
    TruthMode truth_mode = TruthMode::analytic;
};

// Joint standardization: one affine map fitted on the union of both sets, so
// the matching/reference relationship (and the analytic ratio) is preserved.
void standardize_jointly(Dataset& matching, Dataset& reference) {
    Dataset pooled;
    pooled.instances = matching.instances;
    pooled.instances.append_rows(reference.instances);
    pooled = standardize(pooled);

    std::vector<std::size_t> idx(pooled.instances.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::span<const std::size_t> all(idx);
    matching.instances = pooled.instances.take_rows(all.subspan(0, matching.n()));
    reference.instances = pooled.instances.take_rows(all.subspan(matching.n()));
}

// Median-heuristic bandwidth over the union of both sets. Beyond 2048 rows a
// deterministic evenly-strided subsample feeds the exact median op.
KernelConfig resolve_kernel(const RunConfig& cfg, const Dataset& matching,
                            const Dataset& reference) {
    if (cfg.kernel.policy == BandwidthPolicy::fixed) return cfg.kernel;

    Dataset pooled;
    pooled.instances = matching.instances;
    pooled.instances.append_rows(reference.instances);

    constexpr std::size_t kCap = 2048;
    if (pooled.n() > kCap) {
        std::vector<std::size_t> idx(kCap);
        for (std::size_t i = 0; i < kCap; ++i) idx[i] = i * pooled.n() / kCap;
        pooled.instances = pooled.instances.take_rows(idx);
    }
    return resolve_bandwidth(cfg.kernel, pooled);
}

PreparedData prepare(const RunConfig& cfg, std::uint64_t run_seed) {
    PreparedData data;
    data.truth_mode = cfg.truth;

    if (cfg.source == DataSource::synthetic) {
        SyntheticShiftSpec spec = cfg.synth;
        spec.seed = run_seed;
        ShiftSample sample = generate_shift(spec);
        data.matching = std::move(sample.matching);
        data.reference = std::move(sample.reference);
        data.truth = std::move(sample.true_w_on_matching);
    } else if (!cfg.csv_path.empty()) {
        Dataset full = load_dataset(cfg.csv_path, cfg.csv_has_header);
        SplitSpec split{cfg.n_matching, cfg.n_reference, run_seed};
        auto [matching, reference] = split_match_reference(full, split);
        data.matching = std::move(matching);
        data.reference = std::move(reference);
    } else {
        data.matching = load_dataset(cfg.csv_matching_path, cfg.csv_has_header);
        data.reference = load_dataset(cfg.csv_reference_path, cfg.csv_has_header);
        if (data.matching.d() != data.reference.d()) {
            throw std::invalid_argument("data.csv.matching: dimensionality " +
                                        std::to_string(data.matching.d()) +
                                        " does not match data.csv.reference (" +
                                        std::to_string(data.reference.d()) + ")");
        }
    }

    if (cfg.standardize) {
        standardize_jointly(data.matching, data.reference);
    }
    data.kernel = resolve_kernel(cfg, data.matching, data.reference);

    if (data.truth_mode == TruthMode::full_kmm_oracle) {
        KmmModel oracle = kmm_standard(data.matching, data.reference, data.kernel, kOracleLambda);
        data.truth = predict_importance(oracle, data.matching);
    } else if (data.truth.empty()) {
        throw std::invalid_argument("truth: analytic truth requires a synthetic data source");
    }
    return data;
}

std::vector<double> fit_coefficients(const std::string& method, const Dataset& matching,
                                     const Dataset& reference, const MatchParams& params,
                                     const KernelConfig& kernel) {
    if (method == "kmm") return kmm_standard(matching, reference, kernel, params.lambda).alpha;
    if (method == "glokmm") return glokmm(matching, reference, params, kernel).alpha;
    if (method == "amkm") return amkm(matching, reference, params, kernel).combined_alpha;
    if (method == "enskmm") return enskmm(matching, reference, params, kernel).alpha;
    throw std::invalid_argument("method: unknown method '" + method + "'");
}

// Clamp the selection sizes a method cannot exceed; sweeps over n_m/n_r can
// otherwise push defaults out of range.
MatchParams clamp_params(MatchParams params, std::size_t n_r) {
    params.n = std::min(params.n, n_r);
    params.n_s = std::min(params.n_s, n_r);
    params.n_h = std::min(params.n_h, n_r);
    params.partitions = std::min(params.partitions, n_r);
    return params;
}

ExperimentTask make_task(const RunConfig& cfg, const std::string& method,
                         const PreparedData& data, std::uint64_t run_seed) {
    ExperimentTask task;
    task.method = method;
    task.n_m = data.matching.n();
    task.n_r = data.reference.n();
    task.params = clamp_params(cfg.params, data.reference.n());
    task.params.seed = run_seed;
    task.sigma = data.kernel.sigma;
    task.seed = run_seed;
    task.truth_mode = to_string(data.truth_mode);

    const MatchParams params = task.params;
    const KernelConfig kernel = data.kernel;
    task.fit = [&data, method, params, kernel]() {
        return fit_coefficients(method, data.matching, data.reference, params, kernel);
    };
    task.evaluate = [&data, kernel](const std::vector<double>& alpha) {
        KmmModel view;
        view.alpha = alpha;
        view.anchors = std::make_shared<Dataset>(data.matching);
        view.cfg = kernel;
        std::vector<double> estimated = predict_importance(view, data.matching);
        double err = nmse(estimated, data.truth);
        double mmd2 = mmd_squared(alpha, data.matching, data.reference, kernel);
        return std::make_pair(err, mmd2);
    };
    return task;
}

ExperimentResult aggregate_of(const std::vector<ExperimentResult>& records,
                              const std::string& method_id, std::uint64_t base_seed) {
    ExperimentResult agg = records.front();
    agg.method = method_id;
    agg.seed = base_seed;
    double n = static_cast<double>(records.size());
    agg.nmse = agg.mmd2 = agg.wallclock_ms = agg.sigma = 0.0;
    for (const auto& r : records) {
        agg.nmse += r.nmse;
        agg.mmd2 += r.mmd2;
        agg.wallclock_ms += r.wallclock_ms;
        agg.sigma += r.sigma;
    }
    agg.nmse /= n;
    agg.mmd2 /= n;
    agg.wallclock_ms /= n;
    agg.sigma /= n;
    return agg;
}

ExperimentResult run_once(const RunConfig& cfg, const std::string& method,
                          std::uint64_t run_seed) {
    PreparedData data = prepare(cfg, run_seed);
    ExperimentResult rec = time_run(make_task(cfg, method, data, run_seed));
    if (!cfg.timing) rec.wallclock_ms = 0.0;
    return rec;
}

void check_method_params(const RunConfig& cfg) {
    // Method-required params carry defaults, so only cross-field conflicts
    // need checking here; axis/method applicability lives in sweep().
    if (cfg.source == DataSource::csv && cfg.truth == TruthMode::analytic) {
        throw std::invalid_argument("truth: analytic truth requires a synthetic data source");
    }
}

}  // namespace

std::vector<ExperimentResult> run(const RunConfig& cfg) {
    check_method_params(cfg);
    std::vector<ExperimentResult> records;
    records.reserve(cfg.repeats + 1);
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        records.push_back(run_once(cfg, cfg.method, cfg.seed + r));
    }
    records.push_back(aggregate_of(records, cfg.method + ":mean", cfg.seed));
    return records;
}

std::vector<ExperimentResult> sweep(const RunConfig& cfg) {
    check_method_params(cfg);
    if (cfg.sweep_axis.empty() || cfg.sweep_values.empty()) {
        throw std::invalid_argument("sweep.axis: sweep requires sweep.axis and sweep.values");
    }
    const std::string& axis = cfg.sweep_axis;
    const bool size_axis = axis == "n_m" || axis == "n_r";
    if (!size_axis) {
        static const std::map<std::string, std::string> owner{
            {"n", "amkm"}, {"n_s", "amkm"}, {"n_h", "glokmm"}, {"partitions", "enskmm"}};
        if (owner.at(axis) != cfg.method) {
            throw std::invalid_argument("sweep.axis: axis '" + axis + "' applies to method '" +
                                        owner.at(axis) + "', not '" + cfg.method + "'");
        }
    }

    std::vector<ExperimentResult> out;
    for (std::size_t value : cfg.sweep_values) {
        RunConfig point = cfg;
        if (axis == "n_m" || axis == "n_r") {
            if (point.source == DataSource::synthetic) {
                (axis == "n_m" ? point.synth.n_m : point.synth.n_r) = value;
            } else if (!point.csv_path.empty()) {
                (axis == "n_m" ? point.n_matching : point.n_reference) = value;
            } else {
                throw std::invalid_argument(
                    "sweep.axis: size axes need a splittable data source (synthetic or "
                    "data.csv.path)");
            }
        } else if (axis == "n") {
            point.params.n = value;
        } else if (axis == "n_s") {
            point.params.n_s = value;
        } else if (axis == "n_h") {
            point.params.n_h = value;
        } else {
            point.params.partitions = value;
        }

        std::vector<ExperimentResult> records;
        for (std::size_t r = 0; r < point.repeats; ++r) {
            records.push_back(run_once(point, point.method, point.seed + r));
        }
        out.push_back(aggregate_of(records, point.method, point.seed));
    }
    return out;
}

std::vector<ExperimentResult> scalable(const RunConfig& cfg) {
    check_method_params(cfg);
    if (cfg.scalable_batches == 0) return {};
    const std::size_t total_reference =
        cfg.scalable_initial + cfg.scalable_batch * cfg.scalable_batches;
    if (cfg.scalable_initial < 1 || cfg.scalable_batch < 1) {
        throw std::invalid_argument("scalable.initial_reference: initial and batch sizes must be >= 1");
    }

    // per step, across repeats
    std::vector<std::vector<ExperimentResult>> step_records(cfg.scalable_batches);

    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t run_seed = cfg.seed + r;
        RunConfig big = cfg;
        if (big.source == DataSource::synthetic) {
            big.synth.n_r = total_reference;
        } else if (!big.csv_path.empty()) {
            big.n_reference = total_reference;
        } else {
            // Pre-split reference file: the pool is the file itself.
            big.n_reference = 0;
        }
        PreparedData data = prepare(big, run_seed);
        if (data.reference.n() < total_reference) {
            throw std::invalid_argument("scalable.batches: reference pool exhausted (have " +
                                        std::to_string(data.reference.n()) + " rows, need " +
                                        std::to_string(total_reference) + ")");
        }

        auto slice = [&](std::size_t begin, std::size_t count) {
            std::vector<std::size_t> idx(count);
            for (std::size_t i = 0; i < count; ++i) idx[i] = begin + i;
            Dataset out;
            out.instances = data.reference.instances.take_rows(idx);
            out.feature_names = data.reference.feature_names;
            out.source = data.reference.source + "#slice";
            return out;
        };

        ReferencePool pool = append_batch({}, slice(0, cfg.scalable_initial));

        AmkmModel amkm_model;
        MatchParams base_params = clamp_params(cfg.params, cfg.scalable_initial);
        base_params.seed = run_seed;
        if (cfg.method == "amkm") {
            amkm_model = amkm(data.matching, pool.flatten(), base_params, data.kernel);
        }

        for (std::size_t step = 0; step < cfg.scalable_batches; ++step) {
            Dataset batch = slice(cfg.scalable_initial + step * cfg.scalable_batch,
                                  cfg.scalable_batch);
            pool = append_batch(std::move(pool), std::move(batch));
            const Dataset& new_block = pool.batches().back();

            PreparedData step_data;
            step_data.matching = data.matching;
            step_data.reference = pool.flatten();
            step_data.truth = data.truth;
            step_data.kernel = data.kernel;
            step_data.truth_mode = data.truth_mode;
            if (step_data.truth_mode == TruthMode::full_kmm_oracle) {
                KmmModel oracle = kmm_standard(step_data.matching, step_data.reference,
                                               step_data.kernel, kOracleLambda);
                step_data.truth = predict_importance(oracle, step_data.matching);
            }

            ExperimentTask task = make_task(cfg, cfg.method, step_data, run_seed);
            if (cfg.method == "amkm") {
                // Append repetitions drawn from the new block only.
                const AmkmModel* prev = &amkm_model;
                AmkmModel next;
                task.fit = [&data, &new_block, prev, base_params, &next]() {
                    next = amkm_append(*prev, data.matching, new_block, base_params,
                                       prev->cfg);
                    return next.combined_alpha;
                };
                ExperimentResult rec = time_run(task);
                amkm_model = std::move(next);
                if (!cfg.timing) rec.wallclock_ms = 0.0;
                step_records[step].push_back(std::move(rec));
            } else {
                ExperimentResult rec = time_run(task);
                if (!cfg.timing) rec.wallclock_ms = 0.0;
                step_records[step].push_back(std::move(rec));
            }
        }
    }

    std::vector<ExperimentResult> out;
    out.reserve(cfg.scalable_batches);
    for (const auto& records : step_records) {
        out.push_back(aggregate_of(records, cfg.method, cfg.seed));
    }
    return out;
}

std::vector<ExperimentResult> compare(const RunConfig& cfg) {
    check_method_params(cfg);
    if (cfg.compare_methods.empty()) {
        throw std::invalid_argument("compare.methods: at least one method required");
    }
    std::vector<ExperimentResult> out;
    for (const auto& method : cfg.compare_methods) {
        std::vector<ExperimentResult> records;
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
            records.push_back(run_once(cfg, method, cfg.seed + r));
        }
        out.push_back(aggregate_of(records, method, cfg.seed));
    }
    return out;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string csv_header() {
    return "method,n_m,n_r,t,n,n_s,n_h,partitions,lambda,sigma,seed,nmse,mmd2,wallclock_ms,"
           "truth_mode";
}

std::string format_record_csv(const ExperimentResult& r) {
    std::string out;
    out += r.method;
    out += ',' + std::to_string(r.n_m);
    out += ',' + std::to_string(r.n_r);
    out += ',' + std::to_string(r.params.t);
    out += ',' + std::to_string(r.params.n);
    out += ',' + std::to_string(r.params.n_s);
    out += ',' + std::to_string(r.params.n_h);
    out += ',' + std::to_string(r.params.partitions);
    out += ',' + fmt_double(r.params.lambda);
    out += ',' + fmt_double(r.sigma);
    out += ',' + std::to_string(r.seed);
    out += ',' + fmt_double(r.nmse);
    out += ',' + fmt_double(r.mmd2);
    out += ',' + fmt_double(r.wallclock_ms);
    out += ',' + r.truth_mode;
    return out;
}

std::string format_record_jsonl(const ExperimentResult& r) {
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["n_m"] = r.n_m;
    j["n_r"] = r.n_r;
    j["t"] = r.params.t;
    j["n"] = r.params.n;
    j["n_s"] = r.params.n_s;
    j["n_h"] = r.params.n_h;
    j["partitions"] = r.params.partitions;
    j["lambda"] = r.params.lambda;
    j["sigma"] = r.sigma;
    j["seed"] = r.seed;
    j["nmse"] = r.nmse;
    j["mmd2"] = r.mmd2;
    j["wallclock_ms"] = r.wallclock_ms;
    j["truth_mode"] = r.truth_mode;
    return j.dump();
}

void write_results(const std::vector<ExperimentResult>& records, const RunConfig& cfg) {
    if (cfg.output.empty()) {
        throw std::invalid_argument("output: an output path is required (config or --output)");
    }
    std::ofstream out(cfg.output, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open output file '" + cfg.output + "'");
    }
    if (cfg.format == OutputFormat::csv) {
        out << csv_header() << '\n';
        for (const auto& r : records) out << format_record_csv(r) << '\n';
    } else {
        for (const auto& r : records) out << format_record_jsonl(r) << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed while writing '" + cfg.output + "'");
    }
}

}  // namespace amkm::cli
