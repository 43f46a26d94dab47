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

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "meda/experiment.hpp"

namespace meda {
namespace {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("meda_experiment_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

RunConfig synthetic_config(std::uint64_t seed = kDefaultSeed) {
    RunConfig c;
    c.synthetic = true;
    c.seed = seed;
    c.hyper.d = 5;
    return c;
}

std::string dump(const RunResult& r) { return to_json(r, false).dump(); }

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST(RunConfig, SettingsAndConfigFile) {
    TempDir tmp;
    std::ofstream(tmp / "run.cfg") << "# comment\n[run]\nsynthetic = true\nd = 4\nlambda=2.5\nmu = 0.3\n"
                                      "normalize = zscore\nkernel = linear\nseed = 7\n";
    RunConfig c;
    load_config_file(tmp / "run.cfg", c);
    EXPECT_TRUE(c.synthetic);
    EXPECT_EQ(c.hyper.d, 4);
    EXPECT_EQ(c.hyper.lambda, 2.5);
    EXPECT_EQ(c.mu_mode, MuMode::fixed);
    EXPECT_EQ(c.mu_value, 0.3);
    EXPECT_EQ(c.normalization, Normalization::zscore);
    EXPECT_EQ(c.kernel.kind, KernelSpec::Kind::linear);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.effective_hyper().fixed_mu, 0.3);

    apply_setting(c, "--mu", "estimate");
    apply_setting(c, "t_max", "3");
    EXPECT_EQ(c.mu_mode, MuMode::estimate);
    EXPECT_EQ(c.hyper.t_max, 3);
    EXPECT_THROW(apply_setting(c, "bogus", "1"), InvalidArgument);
    EXPECT_THROW(apply_setting(c, "d", "4.5"), InvalidArgument);

    std::ofstream(tmp / "bad.cfg") << "d = 4\nlambda\n";
    try {
        load_config_file(tmp / "bad.cfg", c);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    EXPECT_THROW(load_config_file(tmp / "missing.cfg", c), IoError);
}

TEST(CmdRun, DeterministicModuloTiming) {
    TempDir tmp;
    RunConfig c = synthetic_config();
    c.output_path = tmp / "a.json";
    const RunResult a = cmd_run(c);
    c.output_path = tmp / "b.json";
    const RunResult b = cmd_run(c);
    EXPECT_EQ(dump(a), dump(b));

    auto ja = nlohmann::json::parse(read_file(tmp / "a.json"));
    auto jb = nlohmann::json::parse(read_file(tmp / "b.json"));
    EXPECT_EQ(ja["schema"], kRunSchema);
    EXPECT_EQ(ja["schema_version"], kResultSchemaVersion);
    EXPECT_TRUE(ja.contains("timing_ms"));
    ja.erase("timing_ms");
    jb.erase("timing_ms");
    EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(CmdRun, ConfigEchoReproducesTheRun) {
    const RunResult a = cmd_run(synthetic_config(99));
    const nlohmann::json echo = to_json(a.config);
    RunConfig c;
    for (const auto& [key, value] : echo.items()) {
        if (value.is_null() || (value.is_string() && value.get<std::string>().empty())) continue;
        const std::string v = value.is_string() ? value.get<std::string>() : value.dump();
        if (key == "mu_mode") {
            if (v != "fixed") apply_setting(c, "mu", v);
            continue;
        }
        apply_setting(c, key, v);
    }
    EXPECT_EQ(dump(cmd_run(c)), dump(a));
}

TEST(CmdRun, NoShiftTaskIsSolvedExactly) {
    SyntheticTaskSpec spec;
    spec.class_spread = 12.0;
    spec.noise_sigma = 1.0;
    spec.seed = 5;
    const DatasetPair pair = generate_synthetic(spec);
    TempDir tmp;
    save_dataset(tmp / "src.csv", pair.source, Format::dense);
    save_dataset(tmp / "tgt.csv", pair.target, Format::dense);
    RunConfig c;
    c.source_path = tmp / "src.csv";
    c.target_path = tmp / "tgt.csv";
    c.hyper.d = 5;
    const RunResult r = cmd_run(c);
    ASSERT_TRUE(r.final_accuracy);
    EXPECT_EQ(*r.final_accuracy, 1.0);
    EXPECT_EQ(*r.baseline_accuracy, 1.0);
}

TEST(CmdRun, FixedMuDiffersOnlyInMuAndDownstream) {
    RunConfig est = synthetic_config(1003);
    RunConfig fixed = est;
    fixed.mu_mode = MuMode::fixed;
    fixed.mu_value = 0.5;
    const RunResult a = cmd_run(est);
    const RunResult b = cmd_run(fixed);
    for (double mu : b.mu_history()) EXPECT_EQ(mu, 0.5);
    EXPECT_NE(a.mu_history(), b.mu_history());
    EXPECT_EQ(a.principal_angles, b.principal_angles);
    EXPECT_EQ(a.baseline_accuracy, b.baseline_accuracy);
    EXPECT_EQ(a.n_source, b.n_source);
    EXPECT_EQ(a.classes, b.classes);
    for (const auto& it : b.iterations) EXPECT_FALSE(it.a_distance);
    for (const auto& it : a.iterations) EXPECT_TRUE(it.a_distance);
}

TEST(CmdRun, UnlabeledTargetReportsNoAccuracy) {
    const DatasetPair pair = generate_synthetic(standard_synthetic_spec(3));
    TempDir tmp;
    FeatureMatrix tgt = pair.target;
    tgt.labels.reset();
    save_dataset(tmp / "src.csv", pair.source, Format::dense);
    save_dataset(tmp / "tgt.csv", tgt, Format::dense);
    RunConfig c;
    c.source_path = tmp / "src.csv";
    c.target_path = tmp / "tgt.csv";
    c.target_labeled = false;
    c.hyper.d = 5;
    const RunResult r = cmd_run(c);
    EXPECT_FALSE(r.final_accuracy);
    EXPECT_FALSE(r.baseline_accuracy);
    EXPECT_TRUE(to_json(r)["final_accuracy"].is_null());
}

TEST(CmdRun, ErrorCategories) {
    RunConfig c;
    c.source_path = "/nonexistent/src.csv";
    c.target_path = "/nonexistent/tgt.csv";
    try {
        cmd_run(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.exit_code(), 5);
    }
    c = synthetic_config();
    c.hyper.d = 6;
    try {
        cmd_run(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.exit_code(), 3);
    }
    c = synthetic_config();
    c.mu_mode = MuMode::fixed;
    c.mu_value = 1.5;
    EXPECT_THROW(cmd_run(c), InvalidArgument);
}

TEST(CmdSweep, OnePointGridMatchesRun) {
    const RunConfig c = synthetic_config(11);
    const SweepResult s = cmd_sweep(c, {});
    ASSERT_EQ(s.cells.size(), 1u);
    ASSERT_TRUE(s.cells[0].result);
    EXPECT_EQ(dump(*s.cells[0].result), dump(cmd_run(c)));
}

TEST(CmdSweep, OrderIndependentOfWorkerCount) {
    SweepGrid g;
    g.d = {2, 3, 4, 5};
    g.lambda = {1.0, 10.0};
    const RunConfig c = synthetic_config(12);
    const SweepResult one = cmd_sweep(c, g, 1);
    const SweepResult four = cmd_sweep(c, g, 4);
    ASSERT_EQ(one.cells.size(), 8u);
    EXPECT_EQ(to_json(one, false).dump(), to_json(four, false).dump());
    EXPECT_EQ(one.cells[1].config.hyper.lambda, 10.0);
    EXPECT_EQ(one.cells[2].config.hyper.d, 3);
}

TEST(CmdSweep, FailingCellsAreRecorded) {
    SweepGrid g;
    g.d = {5, 6};
    const SweepResult s = cmd_sweep(synthetic_config(), g);
    ASSERT_EQ(s.cells.size(), 2u);
    EXPECT_TRUE(s.cells[0].result);
    EXPECT_FALSE(s.cells[1].result);
    EXPECT_EQ(s.cells[1].error_code, 3);
    EXPECT_NE(sweep_table(s).find("exceeds"), std::string::npos);
}

TEST(CmdSweep, AccuracyRobustAcrossSubspaceDimension) {
    SweepGrid g;
    g.d = {2, 3, 4, 5};
    const SweepResult s = cmd_sweep(synthetic_config(), g, 2);
    double lo = 1.0, hi = 0.0;
    for (const auto& cell : s.cells) {
        ASSERT_TRUE(cell.result) << cell.error;
        lo = std::min(lo, *cell.result->final_accuracy);
        hi = std::max(hi, *cell.result->final_accuracy);
    }
    EXPECT_LE(hi - lo, 0.10);
}

TEST(CmdSweep, MuGridBestIsAtLeastEstimateMinusOnePoint) {
    RunConfig c = synthetic_config(1002);
    c.mu_mode = MuMode::grid;
    const SweepResult s = cmd_sweep(c, {}, 2);
    ASSERT_EQ(s.cells.size(), 11u);
    double best = 0.0;
    for (const auto& cell : s.cells) best = std::max(best, *cell.result->final_accuracy);
    c.mu_mode = MuMode::estimate;
    EXPECT_GE(best, *cmd_run(c).final_accuracy - 0.01);
}

TEST(WorkersFromEnv, ReadsOverride) {
    ::setenv("MEDA_WORKERS", "3", 1);
    EXPECT_EQ(workers_from_env(), 3u);
    ::setenv("MEDA_WORKERS", "zero", 1);
    EXPECT_GE(workers_from_env(), 1u);
    ::unsetenv("MEDA_WORKERS");
}

TEST(CmdBench, SyntheticSuiteIsDeterministic) {
    const RunConfig c = synthetic_config(40);
    const BenchSummary a = cmd_bench("synthetic", c);
    const BenchSummary b = cmd_bench("synthetic", c);
    ASSERT_EQ(a.tasks.size(), static_cast<std::size_t>(kSyntheticSuiteSize));
    EXPECT_EQ(to_json(a, false).dump(), to_json(b, false).dump());
    EXPECT_EQ(bench_table(a), bench_table(b));
    EXPECT_TRUE(a.average_accuracy);
}

TEST(CmdBench, EmptyDirectoryWarnsWithEmptyTable) {
    TempDir tmp;
    const BenchSummary s = cmd_bench(tmp.path().string(), {});
    EXPECT_TRUE(s.tasks.empty());
    EXPECT_FALSE(s.warnings.empty());
    EXPECT_FALSE(s.all_failed());
    EXPECT_THROW(cmd_bench(tmp / "missing", {}), IoError);
}

TEST(CmdBench, DirectoryTasksAndMissingFiles) {
    TempDir tmp;
    const DatasetPair pair = generate_synthetic(standard_synthetic_spec(8));
    save_dataset(tmp / "alpha.csv", pair.source, Format::dense);
    save_dataset(tmp / "beta.libsvm", pair.target, Format::sparse);
    std::ofstream(tmp / "tasks.txt") << "alpha beta\nalpha gamma\n";
    RunConfig c;
    c.hyper.d = 5;
    const BenchSummary s = cmd_bench(tmp.path().string(), c);
    ASSERT_EQ(s.tasks.size(), 1u);
    EXPECT_EQ(s.tasks[0].name, "alpha->beta");
    ASSERT_TRUE(s.tasks[0].result);
    ASSERT_EQ(s.warnings.size(), 1u);
    EXPECT_NE(s.warnings[0].find("gamma"), std::string::npos);

    c.hyper.d = 50;
    EXPECT_TRUE(cmd_bench(tmp.path().string(), c).all_failed());
}

TEST(ModelFile, ReloadPredictsBitIdentically) {
    TempDir tmp;
    SyntheticTaskSpec spec = standard_synthetic_spec(21);
    const DatasetPair raw = generate_synthetic(spec);
    FeatureMatrix src = raw.source, tgt = raw.target;
    for (int& y : *src.labels) y = 10 * y + 1;
    for (int& y : *tgt.labels) y = 10 * y + 1;
    save_dataset(tmp / "src.csv", src, Format::dense);
    save_dataset(tmp / "tgt.csv", tgt, Format::dense);
    RunConfig c;
    c.source_path = tmp / "src.csv";
    c.target_path = tmp / "tgt.csv";
    c.normalization = Normalization::zscore;
    c.hyper.d = 5;

    std::vector<std::pair<std::string, double>> timing;
    const DatasetPair pair = load_pair(c, &timing);
    TrainedModel trained;
    run_pipeline(pair, c, &trained);
    save_model(tmp / "model.json", trained);
    const TrainedModel loaded = load_model(tmp / "model.json");

    const Prediction before = predict_raw(trained, tgt);
    const Prediction after = predict_raw(loaded, tgt);
    EXPECT_EQ(before.labels, after.labels);
    EXPECT_EQ(before.scores, after.scores);
    for (int y : after.labels) EXPECT_EQ(y % 10, 1);
    EXPECT_EQ(after.labels, [&] {
        Labels l = trained.model.pseudo_label_history.back();
        for (int& y : l) y = trained.original_labels.at(static_cast<std::size_t>(y - 1));
        return l;
    }());
}

#ifdef MEDA_CLI_PATH

struct CliResult {
    int code;
    std::string out;
};

CliResult cli(const std::string& args) {
    const std::string cmd = std::string(MEDA_CLI_PATH) + " " + args + " 2>/dev/null";
    CliResult r{-1, {}};
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

TEST(Cli, ExitCodes) {
    TempDir tmp;
    EXPECT_EQ(cli("run --synthetic --d 5 --output " + (tmp / "r.json")).code, 0);
    EXPECT_EQ(cli("run --synthetic --d nope").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
    EXPECT_EQ(cli("run --synthetic --d 6").code, 3);
    EXPECT_EQ(cli("run --source /nonexistent/a.csv --target /nonexistent/b.csv").code, 5);

    std::ofstream(tmp / "bad.csv") << "1,2,1\n1,2,3,1\n";
    std::ofstream(tmp / "ok.csv") << "1,2,1\n";
    EXPECT_EQ(cli("run --source " + (tmp / "bad.csv") + " --target " + (tmp / "ok.csv")).code, 3);
    std::ofstream(tmp / "garbage.csv") << "1,x,1\n";
    EXPECT_EQ(cli("run --source " + (tmp / "garbage.csv") + " --target " + (tmp / "ok.csv")).code, 2);

    std::ofstream(tmp / "dup_a.csv") << "0,0,1\n0,0,1\n1,1,2\n1,1,2\n";
    std::ofstream(tmp / "dup_b.csv") << "0,0,1\n0,0,1\n1,1,2\n1,1,2\n";
    EXPECT_EQ(cli("run --d 1 --p 1 --source " + (tmp / "dup_a.csv") + " --target " + (tmp / "dup_b.csv")).code, 4);
}

TEST(Cli, ConfigFileAndFlagOverride) {
    TempDir tmp;
    std::ofstream(tmp / "run.cfg") << "synthetic = true\nd = 4\nseed = 77\n";
    const CliResult r = cli("run --config " + (tmp / "run.cfg") + " --d 5");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["config"]["d"], 5);
    EXPECT_EQ(j["config"]["seed"], 77);
    EXPECT_EQ(j["schema"], kRunSchema);
}

TEST(Cli, SaveModelThenPredict) {
    TempDir tmp;
    ASSERT_EQ(cli("run --synthetic --d 5 --output " + (tmp / "r.json") + " --save-model " + (tmp / "m.json")).code, 0);
    const FeatureMatrix tgt = generate_synthetic(standard_synthetic_spec()).target;
    save_dataset(tmp / "tgt.csv", tgt, Format::dense);
    const CliResult p = cli("predict --labeled --model " + (tmp / "m.json") + " --input " + (tmp / "tgt.csv"));
    ASSERT_EQ(p.code, 0);
    std::ostringstream expected;
    for (int y : predict_raw(load_model(tmp / "m.json"), tgt).labels) expected << y << '\n';
    EXPECT_EQ(p.out, expected.str());
}

TEST(Cli, SweepAndBench) {
    TempDir tmp;
    const CliResult s = cli("sweep --synthetic --d-list 4,5 --mu-list estimate,0.5 --workers 2 --table " + (tmp / "t.tsv"));
    ASSERT_EQ(s.code, 0);
    EXPECT_EQ(nlohmann::json::parse(s.out)["cells"].size(), 4u);
    EXPECT_NE(read_file(tmp / "t.tsv").find("estimate"), std::string::npos);
    EXPECT_EQ(cli("bench " + tmp.path().string()).code, 0);
    const CliResult b = cli("bench synthetic --d 5");
    ASSERT_EQ(b.code, 0);
    EXPECT_EQ(nlohmann::json::parse(b.out)["schema"], kBenchSchema);
}

#endif

}  // namespace
}  // namespace meda
