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

// meda: command-line front end.
//
//   meda run    [--config FILE] [--source F --target F | --synthetic] [options]
//   meda sweep  [run options] [--d-list 5,10,...] [--mu-list grid] [--workers N]
//   meda bench  SUITE [run options]
//   meda predict --model FILE --input FILE
//
// Exit codes: 0 success, 2 parse/usage, 3 dimension, 4 numerical, 5 I/O, 1 other.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "meda/experiment.hpp"

namespace {

using meda::RunConfig;

struct SharedFlags {
    std::string config_path;
    std::map<std::string, std::string> values;
    bool synthetic = false;
};

// Every RunConfig key as a long flag; values are applied after the config file so flags win.
void add_run_flags(CLI::App* cmd, SharedFlags& f) {
    cmd->add_option("--config", f.config_path, "key = value settings file")->check(CLI::ExistingFile);
    const std::vector<std::pair<std::string, std::string>> keys = {
        {"source", "source domain feature file"},
        {"target", "target domain feature file"},
        {"format", "dense|sparse"},
        {"sparse-dim", "feature count for sparse files (0 infers)"},
        {"target-labeled", "target file carries labels (true|false)"},
        {"normalize", "none|zscore|unit_l2"},
        {"d", "subspace dimension"},
        {"p", "nearest neighbors in the graph"},
        {"lambda", "MMD regularization weight"},
        {"eta", "RKHS norm weight"},
        {"rho", "Laplacian weight"},
        {"t-max", "maximum refinement iterations"},
        {"mu", "estimate|grid|<value in [0,1]>"},
        {"kernel", "rbf|linear"},
        {"bandwidth", "auto|<sigma^2>"},
        {"seed", "random seed"},
        {"output", "write the result JSON here"},
        {"save-model", "write the trained model here"},
    };
    for (const auto& [key, help] : keys) cmd->add_option("--" + key, f.values[key], help);
    cmd->add_flag("--synthetic", f.synthetic, "use the standard synthetic task");
}

RunConfig resolve_config(CLI::App* cmd, const SharedFlags& f) {
    RunConfig c;
    if (!f.config_path.empty()) meda::load_config_file(f.config_path, c);
    for (const auto& [key, value] : f.values)
        if (cmd->get_option("--" + key)->count() > 0) meda::apply_setting(c, key, value);
    if (f.synthetic) c.synthetic = true;
    return c;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        if (!meda::detail::trim(item).empty()) out.emplace_back(meda::detail::trim(item));
    return out;
}

template <typename T, typename Conv>
std::vector<T> parse_list(const std::string& name, const std::string& s, Conv conv) {
    std::vector<T> out;
    for (const auto& item : split_list(s)) out.push_back(static_cast<T>(conv(name, item)));
    return out;
}

meda::SweepGrid parse_grid(const std::map<std::string, std::string>& lists) {
    using namespace meda::detail;
    meda::SweepGrid g;
    g.d = parse_list<meda::Index>("d-list", lists.at("d-list"), to_int);
    g.p = parse_list<int>("p-list", lists.at("p-list"), to_int);
    g.lambda = parse_list<double>("lambda-list", lists.at("lambda-list"), to_double);
    g.eta = parse_list<double>("eta-list", lists.at("eta-list"), to_double);
    g.rho = parse_list<double>("rho-list", lists.at("rho-list"), to_double);
    for (const auto& item : split_list(lists.at("mu-list"))) {
        if (item == "grid") {
            const auto grid = meda::SweepGrid::mu_grid();
            g.mu.insert(g.mu.end(), grid.begin(), grid.end());
        } else if (item == "estimate") {
            g.mu.emplace_back(std::nullopt);
        } else {
            g.mu.emplace_back(to_double("mu-list", item));
        }
    }
    return g;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out || !(out << text)) throw meda::IoError("cannot write '" + path + "'");
}

void emit(const RunConfig& c, const nlohmann::json& j, const std::string& table) {
    if (c.output_path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        meda::write_json(c.output_path, j);
        std::cout << table;
    }
}

int do_sweep(const RunConfig& c, const meda::SweepGrid& grid, unsigned workers, const std::string& table_path) {
    const meda::SweepResult s = meda::cmd_sweep(c, grid, workers);
    const std::string table = meda::sweep_table(s);
    if (!table_path.empty()) write_text(table_path, table);
    emit(c, meda::to_json(s), table);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Manifold embedded distribution alignment for unsupervised domain adaptation"};
    app.set_version_flag("--version", std::string(MEDA_VERSION));
    app.require_subcommand(1);

    SharedFlags run_flags, sweep_flags, bench_flags;
    CLI::App* run = app.add_subcommand("run", "adapt one source/target task");
    add_run_flags(run, run_flags);

    CLI::App* sweep = app.add_subcommand("sweep", "grid over hyperparameters on one task");
    add_run_flags(sweep, sweep_flags);
    std::map<std::string, std::string> lists;
    for (const char* key : {"d-list", "p-list", "lambda-list", "eta-list", "rho-list", "mu-list"})
        sweep->add_option(std::string("--") + key, lists[key], "comma-separated values");
    unsigned workers = 0;
    std::string table_path;
    sweep->add_option("--workers", workers, "worker threads (default: MEDA_WORKERS or all cores)");
    sweep->add_option("--table", table_path, "write the TSV table here");

    CLI::App* bench = app.add_subcommand("bench", "run a benchmark suite");
    add_run_flags(bench, bench_flags);
    std::string suite;
    bench->add_option("suite", suite, "'synthetic' or a directory of domain feature files")->required();

    CLI::App* pred = app.add_subcommand("predict", "label new samples with a saved model");
    std::string model_path, input_path, pred_format = "dense", pred_output;
    bool input_labeled = false;
    meda::Index pred_dim = 0;
    pred->add_option("--model", model_path, "model file written by --save-model")->required();
    pred->add_option("--input", input_path, "feature file to label")->required();
    pred->add_option("--format", pred_format, "dense|sparse");
    pred->add_option("--sparse-dim", pred_dim, "feature count for sparse files");
    pred->add_flag("--labeled", input_labeled, "input rows start with a label column");
    pred->add_option("--output", pred_output, "write labels here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(meda::ErrorCategory::parse);
    }

    try {
        if (*run) {
            const RunConfig c = resolve_config(run, run_flags);
            if (c.mu_mode == meda::MuMode::grid) {
                c.validate();
                return do_sweep(c, {}, workers ? workers : meda::workers_from_env(), "");
            }
            const meda::RunResult r = meda::cmd_run(c);
            std::ostringstream line;
            line << r.task << ": accuracy " << meda::detail::fmt_opt(r.final_accuracy) << " (1NN "
                 << meda::detail::fmt_opt(r.baseline_accuracy) << "), " << r.iterations.size() << " iterations\n";
            if (c.output_path.empty()) std::cout << meda::to_json(r).dump(2) << '\n';
            else std::cout << line.str();
            return 0;
        }
        if (*sweep) {
            const RunConfig c = resolve_config(sweep, sweep_flags);
            return do_sweep(c, parse_grid(lists), workers ? workers : meda::workers_from_env(), table_path);
        }
        if (*bench) {
            const RunConfig c = resolve_config(bench, bench_flags);
            const meda::BenchSummary s = meda::cmd_bench(suite, c);
            for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
            emit(c, meda::to_json(s), meda::bench_table(s));
            if (s.all_failed()) return s.tasks.front().error_code ? s.tasks.front().error_code : 1;
            return 0;
        }
        if (*pred) {
            const meda::TrainedModel model = meda::load_model(model_path);
            const meda::FeatureMatrix x =
                meda::load_dataset(input_path, {meda::parse_format(pred_format), input_labeled, pred_dim});
            const meda::Prediction p = meda::predict_raw(model, x);
            std::ostringstream os;
            for (int y : p.labels) os << y << '\n';
            if (pred_output.empty()) std::cout << os.str();
            else write_text(pred_output, os.str());
            if (x.labels) std::cerr << "accuracy " << meda::detail::fmt_opt(meda::accuracy(p.labels, *x.labels)) << '\n';
            return 0;
        }
    } catch (const meda::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
