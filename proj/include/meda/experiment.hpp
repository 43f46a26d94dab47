/*
 * Copyright 2026 The meda Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

// Experiment drivers behind the command-line tool: configuration, the end-to-end
// adaptation pipeline, hyperparameter sweeps and benchmark suites, and the JSON result
// schema they all emit.

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "meda/alignment.hpp"
#include "meda/data.hpp"
#include "meda/error.hpp"
#include "meda/learner.hpp"
#include "meda/manifold.hpp"
#include "meda/serialization.hpp"
#include "meda/types.hpp"

#ifndef MEDA_VERSION
#define MEDA_VERSION "1.0.0"
#endif

namespace meda {

inline constexpr const char* kRunSchema = "meda.run_result";
inline constexpr const char* kSweepSchema = "meda.sweep_result";
inline constexpr const char* kBenchSchema = "meda.bench_result";
inline constexpr int kResultSchemaVersion = 1;

enum class MuMode { estimate, fixed, grid };

struct RunConfig {
    std::string source_path;
    std::string target_path;
    bool synthetic = false;  // use the standard synthetic task for `seed` instead of files
    Format format = Format::dense;
    Index sparse_dim = 0;
    bool target_labeled = true;
    Normalization normalization = Normalization::none;
    Hyperparameters hyper;
    MuMode mu_mode = MuMode::estimate;
    double mu_value = 0.5;
    KernelSpec kernel;
    std::uint64_t seed = kDefaultSeed;
    std::string output_path;
    std::string model_path;

    /// Hyperparameters with the mu policy and seed folded in.
    Hyperparameters effective_hyper() const {
        Hyperparameters h = hyper;
        h.seed = seed;
        h.fixed_mu.reset();
        if (mu_mode == MuMode::fixed) h.fixed_mu = mu_value;
        return h;
    }

    void validate() const {
        if (!synthetic && (source_path.empty() || target_path.empty()))
            throw InvalidArgument("need --source and --target, or --synthetic");
        if (mu_mode == MuMode::fixed && !(mu_value >= 0.0 && mu_value <= 1.0))
            throw InvalidArgument("fixed mu must lie in [0, 1]");
        if (kernel.bandwidth && !(*kernel.bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
        effective_hyper().validate();
    }
};

namespace detail {

inline std::string normalize_key(std::string_view key) {
    std::string k(trim(key));
    while (!k.empty() && k.front() == '-') k.erase(k.begin());
    std::replace(k.begin(), k.end(), '_', '-');
    return k;
}

inline double to_double(std::string_view key, std::string_view v) {
    v = trim(v);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        throw InvalidArgument("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
    return out;
}

inline long long to_int(std::string_view key, std::string_view v) {
    v = trim(v);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw InvalidArgument("'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
    return out;
}

inline bool to_bool(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InvalidArgument("'" + std::string(key) + "' expects a boolean, got '" + std::string(v) + "'");
}

}  // namespace detail

/// Applies one `key = value` setting. Keys are the long flag names of the CLI.
inline void apply_setting(RunConfig& c, std::string_view raw_key, std::string_view raw_value) {
    const std::string key = detail::normalize_key(raw_key);
    const std::string value(detail::trim(raw_value));
    if (key == "source") c.source_path = value;
    else if (key == "target") c.target_path = value;
    else if (key == "synthetic") c.synthetic = detail::to_bool(key, value);
    else if (key == "format") c.format = parse_format(value);
    else if (key == "sparse-dim") c.sparse_dim = detail::to_int(key, value);
    else if (key == "target-labeled") c.target_labeled = detail::to_bool(key, value);
    else if (key == "normalize" || key == "normalization") c.normalization = parse_normalization(value);
    else if (key == "d") c.hyper.d = detail::to_int(key, value);
    else if (key == "p") c.hyper.p = static_cast<int>(detail::to_int(key, value));
    else if (key == "lambda") c.hyper.lambda = detail::to_double(key, value);
    else if (key == "eta") c.hyper.eta = detail::to_double(key, value);
    else if (key == "rho") c.hyper.rho = detail::to_double(key, value);
    else if (key == "t-max") c.hyper.t_max = static_cast<int>(detail::to_int(key, value));
    else if (key == "mu") {
        if (value == "estimate") c.mu_mode = MuMode::estimate;
        else if (value == "grid") c.mu_mode = MuMode::grid;
        else {
            const std::string_view v = std::string_view(value).substr(value.rfind("fixed:", 0) == 0 ? 6 : 0);
            c.mu_mode = MuMode::fixed;
            c.mu_value = detail::to_double(key, v);
        }
    } else if (key == "kernel") {
        if (value == "rbf") c.kernel.kind = KernelSpec::Kind::rbf;
        else if (value == "linear") c.kernel.kind = KernelSpec::Kind::linear;
        else throw InvalidArgument("unknown kernel '" + value + "'");
    } else if (key == "bandwidth") {
        if (value == "auto") c.kernel.bandwidth.reset();
        else c.kernel.bandwidth = detail::to_double(key, value);
    } else if (key == "seed") {
        const long long s = detail::to_int(key, value);
        if (s < 0) throw InvalidArgument("seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "output") c.output_path = value;
    else if (key == "save-model") c.model_path = value;
    else throw InvalidArgument("unknown setting '" + std::string(raw_key) + "'");
}

/// Reads `key = value` lines; blank lines, `#` comments and `[section]` headers are skipped.
inline void load_config_file(const std::string& path, RunConfig& c) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view l = detail::trim(line);
        if (l.empty() || l.front() == '#' || l.front() == ';' || l.front() == '[') continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected key = value");
        try {
            std::string_view value = detail::trim(l.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                value = value.substr(1, value.size() - 2);
            apply_setting(c, l.substr(0, eq), value);
        } catch (const InvalidArgument& e) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

inline const char* to_string(MuMode m) {
    switch (m) {
        case MuMode::estimate: return "estimate";
        case MuMode::fixed: return "fixed";
        case MuMode::grid: return "grid";
    }
    return "estimate";
}

/// Every field needed to reproduce a run.
inline nlohmann::json to_json(const RunConfig& c) {
    using nlohmann::json;
    json j = {{"source", c.source_path},
              {"target", c.target_path},
              {"synthetic", c.synthetic},
              {"format", to_string(c.format)},
              {"sparse_dim", c.sparse_dim},
              {"target_labeled", c.target_labeled},
              {"normalize", to_string(c.normalization)},
              {"d", c.hyper.d},
              {"p", c.hyper.p},
              {"lambda", c.hyper.lambda},
              {"eta", c.hyper.eta},
              {"rho", c.hyper.rho},
              {"t_max", c.hyper.t_max},
              {"mu_mode", to_string(c.mu_mode)},
              {"kernel", to_string(c.kernel.kind)},
              {"seed", c.seed}};
    j["mu"] = c.mu_mode == MuMode::fixed ? json(c.mu_value) : json(nullptr);
    j["bandwidth"] = c.kernel.bandwidth ? json(*c.kernel.bandwidth) : json("auto");
    return j;
}

struct IterationRecord {
    double mu = 0.0;
    double label_agreement = 0.0;
    std::optional<double> accuracy;
    std::optional<ADistanceReport> a_distance;
};

struct RunResult {
    std::string task;
    RunConfig config;
    Index n_source = 0, n_target = 0, feature_dim = 0;
    int classes = 0;
    std::vector<double> principal_angles;
    std::optional<double> baseline_accuracy;  // 1NN on the normalized input features
    std::vector<IterationRecord> iterations;
    std::optional<double> final_accuracy;
    bool converged = false;
    std::vector<std::pair<std::string, double>> timing_ms;

    std::vector<double> mu_history() const {
        std::vector<double> out;
        for (const auto& it : iterations) out.push_back(it.mu);
        return out;
    }
};

inline nlohmann::json to_json(const ADistanceReport& r) {
    return {{"d_marginal", r.d_marginal},
            {"marginal_error", r.marginal_error},
            {"d_conditional", r.d_conditional},
            {"conditional_errors", r.conditional_errors}};
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

/// The canonical run-result document. `include_timing` drops the only
/// non-deterministic field when false.
inline nlohmann::json to_json(const RunResult& r, bool include_timing = true) {
    using nlohmann::json;
    json iters = json::array();
    for (std::size_t t = 0; t < r.iterations.size(); ++t) {
        const auto& it = r.iterations[t];
        iters.push_back({{"iteration", t + 1},
                         {"mu", it.mu},
                         {"label_agreement", it.label_agreement},
                         {"accuracy", optional_json(it.accuracy)},
                         {"a_distance", it.a_distance ? to_json(*it.a_distance) : json(nullptr)}});
    }
    json j = {{"schema", kRunSchema},
              {"schema_version", kResultSchemaVersion},
              {"artifact_version", MEDA_VERSION},
              {"task", r.task},
              {"config", to_json(r.config)},
              {"n_source", r.n_source},
              {"n_target", r.n_target},
              {"feature_dim", r.feature_dim},
              {"classes", r.classes},
              {"principal_angles", r.principal_angles},
              {"baseline_accuracy", optional_json(r.baseline_accuracy)},
              {"iterations", std::move(iters)},
              {"mu_history", r.mu_history()},
              {"final_accuracy", optional_json(r.final_accuracy)},
              {"converged", r.converged}};
    if (include_timing) {
        json timing = json::object();
        for (const auto& [phase, ms] : r.timing_ms) timing[phase] = ms;
        j["timing_ms"] = std::move(timing);
    }
    return j;
}

namespace detail {

class PhaseTimer {
public:
    explicit PhaseTimer(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}

    void mark(std::string phase) {
        const auto now = std::chrono::steady_clock::now();
        sink_.emplace_back(std::move(phase), std::chrono::duration<double, std::milli>(now - last_).count());
        last_ = now;
    }

private:
    std::vector<std::pair<std::string, double>>& sink_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Loads (or generates) and normalizes the task named by the config.
inline DatasetPair load_pair(const RunConfig& c, std::vector<std::pair<std::string, double>>* timing = nullptr) {
    std::vector<std::pair<std::string, double>> local;
    detail::PhaseTimer timer(timing ? *timing : local);
    FeatureMatrix src, tgt;
    std::string name;
    if (c.synthetic) {
        DatasetPair raw = generate_synthetic(standard_synthetic_spec(c.seed));
        src = std::move(raw.source);
        tgt = std::move(raw.target);
        name = raw.name;
    } else {
        src = load_dataset(c.source_path, {c.format, true, c.sparse_dim});
        tgt = load_dataset(c.target_path, {c.format, c.target_labeled, c.sparse_dim});
        name = std::filesystem::path(c.source_path).stem().string() + "->" +
               std::filesystem::path(c.target_path).stem().string();
    }
    timer.mark("load");
    DatasetPair pair = make_dataset_pair(std::move(src), std::move(tgt), name, c.normalization);
    timer.mark("normalize");
    return pair;
}

/// Manifold transform, fit and evaluation on an already prepared pair.
inline RunResult run_pipeline(const DatasetPair& pair, const RunConfig& c, TrainedModel* trained = nullptr,
                              std::vector<std::pair<std::string, double>> timing = {}) {
    if (c.mu_mode == MuMode::grid) throw InvalidArgument("mu grid runs go through the sweep driver");
    const Hyperparameters hyper = c.effective_hyper();
    hyper.validate();

    RunResult r;
    r.task = pair.name;
    r.config = c;
    r.n_source = pair.source.rows();
    r.n_target = pair.target.rows();
    r.feature_dim = pair.source.dim();
    r.classes = class_count(*pair.source.labels);
    r.timing_ms = std::move(timing);
    detail::PhaseTimer timer(r.timing_ms);

    const GeodesicKernel g = learn_geodesic_kernel(pair.source, pair.target, hyper.d);
    const FeatureMatrix zs = manifold_transform(g, pair.source);
    const FeatureMatrix zt = manifold_transform(g, pair.target);
    r.principal_angles.assign(g.principal_angles.data(), g.principal_angles.data() + g.principal_angles.size());
    timer.mark("manifold");

    MedaModel model = fit(zs, zt, hyper, c.kernel);
    model.feature_map = g.sqrt_g;
    timer.mark("fit");

    const std::optional<Labels>& truth = pair.target.labels;
    if (truth) r.baseline_accuracy = accuracy(base_classifier_labels(pair.source, pair.target), *truth);
    for (std::size_t t = 0; t < model.iterations(); ++t) {
        IterationRecord rec;
        rec.mu = model.mu_history[t];
        rec.label_agreement = model.label_history[t];
        rec.a_distance = model.a_distance_history[t];
        if (truth) rec.accuracy = accuracy(model.pseudo_label_history[t], *truth);
        r.iterations.push_back(std::move(rec));
    }
    if (truth) r.final_accuracy = r.iterations.back().accuracy;
    r.converged = model.converged;
    timer.mark("evaluate");

    if (trained) {
        trained->model = std::move(model);
        trained->normalization = pair.stats;
        trained->original_labels = pair.original_labels;
    }
    return r;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

/// Single adaptation task: load, normalize, manifold transform, fit, evaluate. Writes the
/// result document and the model when the config names output paths.
inline RunResult cmd_run(const RunConfig& c) {
    c.validate();
    if (c.mu_mode == MuMode::grid) throw InvalidArgument("mu grid runs go through the sweep driver");
    std::vector<std::pair<std::string, double>> timing;
    const DatasetPair pair = load_pair(c, &timing);
    TrainedModel trained;
    RunResult r = run_pipeline(pair, c, c.model_path.empty() ? nullptr : &trained, std::move(timing));
    if (!c.output_path.empty()) write_json(c.output_path, to_json(r));
    if (!c.model_path.empty()) save_model(c.model_path, trained);
    return r;
}

/// Parameter lists for a Cartesian sweep. An empty list keeps the base config's value.
/// In `mu`, nullopt stands for the estimated adaptive factor.
struct SweepGrid {
    std::vector<Index> d;
    std::vector<int> p;
    std::vector<double> lambda, eta, rho;
    std::vector<std::optional<double>> mu;

    static std::vector<std::optional<double>> mu_grid() {
        std::vector<std::optional<double>> out;
        for (int k = 0; k <= 10; ++k) out.emplace_back(k / 10.0);
        return out;
    }
};

struct SweepCell {
    std::size_t index = 0;
    RunConfig config;
    std::optional<RunResult> result;
    std::string error;
    int error_code = 0;
};

struct SweepResult {
    RunConfig base;
    std::vector<SweepCell> cells;
};

/// Cells in row-major order over (d, p, lambda, eta, rho, mu).
inline std::vector<RunConfig> expand_grid(const RunConfig& base, const SweepGrid& grid) {
    auto or_base = [](const auto& list, auto value) {
        using T = std::decay_t<decltype(value)>;
        return list.empty() ? std::vector<T>{value} : std::vector<T>(list.begin(), list.end());
    };
    std::vector<std::optional<double>> mus = grid.mu;
    if (mus.empty()) {
        if (base.mu_mode == MuMode::grid) mus = SweepGrid::mu_grid();
        else if (base.mu_mode == MuMode::fixed) mus = {base.mu_value};
        else mus = {std::nullopt};
    }
    std::vector<RunConfig> out;
    for (Index d : or_base(grid.d, base.hyper.d))
        for (int p : or_base(grid.p, base.hyper.p))
            for (double lambda : or_base(grid.lambda, base.hyper.lambda))
                for (double eta : or_base(grid.eta, base.hyper.eta))
                    for (double rho : or_base(grid.rho, base.hyper.rho))
                        for (const auto& mu : mus) {
                            RunConfig c = base;
                            c.hyper.d = d, c.hyper.p = p, c.hyper.lambda = lambda, c.hyper.eta = eta, c.hyper.rho = rho;
                            c.mu_mode = mu ? MuMode::fixed : MuMode::estimate;
                            c.mu_value = mu.value_or(0.5);
                            c.output_path.clear();
                            c.model_path.clear();
                            out.push_back(std::move(c));
                        }
    return out;
}

/// Worker count from MEDA_WORKERS, else the hardware concurrency.
inline unsigned workers_from_env() {
    if (const char* env = std::getenv("MEDA_WORKERS")) {
        const std::string_view v(env);
        unsigned n = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        if (ec == std::errc() && ptr == v.data() + v.size() && n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs every grid cell on a shared, once-loaded pair. Failing cells record their error
/// and the sweep continues. Output order is the grid order regardless of `workers`.
inline SweepResult cmd_sweep(const RunConfig& base, const SweepGrid& grid, unsigned workers = 1) {
    {
        RunConfig check = base;
        if (check.mu_mode == MuMode::grid) check.mu_mode = MuMode::estimate;
        check.validate();
    }
    SweepResult out;
    out.base = base;
    const std::vector<RunConfig> configs = expand_grid(base, grid);
    if (configs.empty()) throw InvalidArgument("sweep grid is empty");
    const DatasetPair pair = load_pair(base);

    out.cells.resize(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            SweepCell& cell = out.cells[i];
            cell.index = i;
            cell.config = configs[i];
            try {
                cell.result = run_pipeline(pair, configs[i]);
            } catch (const Error& e) {
                cell.error = e.what();
                cell.error_code = e.exit_code();
            } catch (const std::exception& e) {
                cell.error = e.what();
                cell.error_code = 1;
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(configs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return out;
}

inline nlohmann::json to_json(const SweepResult& s, bool include_timing = true) {
    using nlohmann::json;
    json cells = json::array();
    for (const auto& cell : s.cells) {
        json j = {{"index", cell.index}, {"config", to_json(cell.config)}};
        j["result"] = cell.result ? to_json(*cell.result, include_timing) : json(nullptr);
        j["error"] = cell.error.empty() ? json(nullptr) : json(cell.error);
        cells.push_back(std::move(j));
    }
    return {{"schema", kSweepSchema},
            {"schema_version", kResultSchemaVersion},
            {"artifact_version", MEDA_VERSION},
            {"base_config", to_json(s.base)},
            {"cells", std::move(cells)}};
}

namespace detail {

inline std::string fmt_opt(const std::optional<double>& v, int precision = 4) {
    if (!v) return "NA";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << *v;
    return os.str();
}

}  // namespace detail

/// Tab-separated table, one row per cell, for plotting sensitivity curves.
inline std::string sweep_table(const SweepResult& s) {
    std::ostringstream os;
    os << "index\td\tp\tlambda\teta\trho\tmu\titerations\tfinal_mu\taccuracy\tbaseline\terror\n";
    for (const auto& cell : s.cells) {
        const auto& c = cell.config;
        os << cell.index << '\t' << c.hyper.d << '\t' << c.hyper.p << '\t' << c.hyper.lambda << '\t'
           << c.hyper.eta << '\t' << c.hyper.rho << '\t'
           << (c.mu_mode == MuMode::fixed ? detail::fmt_opt(c.mu_value, 2) : "estimate") << '\t';
        if (cell.result) {
            const auto& r = *cell.result;
            os << r.iterations.size() << '\t' << detail::fmt_opt(r.iterations.back().mu) << '\t'
               << detail::fmt_opt(r.final_accuracy) << '\t' << detail::fmt_opt(r.baseline_accuracy) << '\t' << '-';
        } else {
            os << "NA\tNA\tNA\tNA\t" << cell.error;
        }
        os << '\n';
    }
    return os.str();
}

struct BenchTask {
    std::string name;
    std::optional<RunResult> result;
    std::string error;
    int error_code = 0;
};

struct BenchSummary {
    std::string suite;
    std::vector<BenchTask> tasks;
    std::vector<std::string> warnings;
    std::optional<double> average_accuracy;
    std::optional<double> average_baseline;

    bool all_failed() const {
        return !tasks.empty() &&
               std::all_of(tasks.begin(), tasks.end(), [](const BenchTask& t) { return !t.result; });
    }
};

inline constexpr int kSyntheticSuiteSize = 6;

namespace detail {

inline std::optional<Format> format_for_extension(const std::filesystem::path& p) {
    const std::string ext = p.extension().string();
    if (ext == ".csv" || ext == ".txt" || ext == ".dat") return Format::dense;
    if (ext == ".svm" || ext == ".libsvm" || ext == ".sparse") return Format::sparse;
    return std::nullopt;
}

inline void summarize(BenchSummary& s) {
    double acc = 0.0, base = 0.0;
    int n_acc = 0, n_base = 0;
    for (const auto& t : s.tasks) {
        if (!t.result) continue;
        if (t.result->final_accuracy) acc += *t.result->final_accuracy, ++n_acc;
        if (t.result->baseline_accuracy) base += *t.result->baseline_accuracy, ++n_base;
    }
    if (n_acc) s.average_accuracy = acc / n_acc;
    if (n_base) s.average_baseline = base / n_base;
}

template <typename Fn>
void run_bench_task(BenchSummary& s, std::string name, Fn&& fn) {
    BenchTask task;
    task.name = std::move(name);
    try {
        task.result = fn();
    } catch (const Error& e) {
        task.error = e.what();
        task.error_code = e.exit_code();
        s.warnings.push_back(task.name + ": " + e.what());
    }
    s.tasks.push_back(std::move(task));
}

}  // namespace detail

/// Runs a benchmark suite with the base config's hyperparameters.
///
/// "synthetic": kSyntheticSuiteSize standard synthetic tasks seeded from base.seed. Their
/// features have D = 10, so d is capped at 5.
///
/// Otherwise `suite` is a directory of per-domain feature files (.csv/.txt/.dat dense,
/// .svm/.libsvm/.sparse sparse). A `tasks.txt` file listing "source target" stems per line
/// selects the tasks; without it every ordered pair of distinct domains runs. Tasks whose
/// files are missing or fail are reported as warnings and skipped.
inline BenchSummary cmd_bench(const std::string& suite, const RunConfig& base) {
    namespace fs = std::filesystem;
    BenchSummary s;
    s.suite = suite;
    RunConfig cfg = base;
    cfg.output_path.clear();
    cfg.model_path.clear();
    if (cfg.mu_mode == MuMode::grid) cfg.mu_mode = MuMode::estimate;

    if (suite == "synthetic") {
        cfg.synthetic = true;
        cfg.hyper.d = std::min<Index>(cfg.hyper.d, 5);
        for (int i = 0; i < kSyntheticSuiteSize; ++i) {
            RunConfig c = cfg;
            c.seed = base.seed + static_cast<std::uint64_t>(i);
            detail::run_bench_task(s, "synthetic-" + std::to_string(i), [&] { return run_pipeline(load_pair(c), c); });
        }
        detail::summarize(s);
        return s;
    }

    const fs::path dir(suite);
    if (!fs::is_directory(dir)) throw IoError("benchmark suite '" + suite + "' is neither 'synthetic' nor a directory");
    std::map<std::string, fs::path> domains;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().filename() != "tasks.txt" && detail::format_for_extension(entry.path()))
            domains.emplace(entry.path().stem().string(), entry.path());

    std::vector<std::pair<std::string, std::string>> tasks;
    const fs::path listing = dir / "tasks.txt";
    if (fs::exists(listing)) {
        std::ifstream in(listing);
        std::string line;
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            std::string a, b;
            if (line.empty() || line[0] == '#' || !(ls >> a >> b)) continue;
            tasks.emplace_back(a, b);
        }
    } else {
        for (const auto& [a, pa] : domains)
            for (const auto& [b, pb] : domains)
                if (a != b) tasks.emplace_back(a, b);
    }
    if (tasks.empty()) s.warnings.push_back("no tasks found in '" + suite + "'");

    for (const auto& [a, b] : tasks) {
        const std::string name = a + "->" + b;
        if (!domains.count(a) || !domains.count(b)) {
            s.warnings.push_back(name + ": missing feature file, skipped");
            continue;
        }
        RunConfig c = cfg;
        c.synthetic = false;
        c.source_path = domains[a].string();
        c.target_path = domains[b].string();
        c.format = *detail::format_for_extension(domains[a]);
        detail::run_bench_task(s, name, [&] {
            const Format tgt_format = *detail::format_for_extension(domains[b]);
            FeatureMatrix src = load_dataset(c.source_path, {c.format, true, c.sparse_dim});
            FeatureMatrix tgt = load_dataset(c.target_path, {tgt_format, c.target_labeled, c.sparse_dim});
            // Inferred sparse widths stop at the largest index present in each file.
            const Index dim = std::max(src.dim(), tgt.dim());
            if (c.format == Format::sparse) src.data.conservativeResizeLike(Matrix::Zero(src.rows(), dim));
            if (tgt_format == Format::sparse) tgt.data.conservativeResizeLike(Matrix::Zero(tgt.rows(), dim));
            return run_pipeline(make_dataset_pair(std::move(src), std::move(tgt), name, c.normalization), c);
        });
    }
    detail::summarize(s);
    return s;
}

inline nlohmann::json to_json(const BenchSummary& s, bool include_timing = true) {
    using nlohmann::json;
    json tasks = json::array();
    for (const auto& t : s.tasks) {
        json j = {{"name", t.name}};
        j["result"] = t.result ? to_json(*t.result, include_timing) : json(nullptr);
        j["error"] = t.error.empty() ? json(nullptr) : json(t.error);
        tasks.push_back(std::move(j));
    }
    return {{"schema", kBenchSchema},
            {"schema_version", kResultSchemaVersion},
            {"artifact_version", MEDA_VERSION},
            {"suite", s.suite},
            {"tasks", std::move(tasks)},
            {"warnings", s.warnings},
            {"average_accuracy", optional_json(s.average_accuracy)},
            {"average_baseline", optional_json(s.average_baseline)}};
}

inline std::string bench_table(const BenchSummary& s) {
    std::ostringstream os;
    os << std::left << std::setw(28) << "task" << std::setw(10) << "1NN" << std::setw(10) << "MEDA"
       << "iterations\n";
    for (const auto& t : s.tasks) {
        os << std::setw(28) << t.name;
        if (t.result)
            os << std::setw(10) << detail::fmt_opt(t.result->baseline_accuracy) << std::setw(10)
               << detail::fmt_opt(t.result->final_accuracy) << t.result->iterations.size() << '\n';
        else
            os << "failed: " << t.error << '\n';
    }
    os << std::setw(28) << "average" << std::setw(10) << detail::fmt_opt(s.average_baseline) << std::setw(10)
       << detail::fmt_opt(s.average_accuracy) << '\n';
    return os.str();
}

}  // namespace meda
