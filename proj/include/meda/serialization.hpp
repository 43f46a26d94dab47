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

// Versioned JSON container for a fitted model together with the preprocessing needed to
// score raw feature rows. Doubles are written in shortest round-trip form, so a reloaded
// model predicts bit-identically.

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "meda/data.hpp"
#include "meda/error.hpp"
#include "meda/learner.hpp"
#include "meda/types.hpp"

namespace meda {

inline constexpr const char* kModelSchema = "meda.model";
inline constexpr int kModelSchemaVersion = 1;

struct TrainedModel {
    MedaModel model;
    NormalizationStats normalization;
    std::vector<int> original_labels;  // class c predicts original_labels[c - 1]
};

namespace json_io {

using nlohmann::json;

inline json matrix(const Matrix& m) {
    json data = json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Matrix matrix(const json& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const json& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols)
        throw ParseError("matrix payload has the wrong number of entries");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)].get<double>();
    return m;
}

inline json vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vector(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace json_io

inline nlohmann::json to_json(const TrainedModel& t) {
    using nlohmann::json;
    const MedaModel& m = t.model;
    json kernel = {{"kind", to_string(m.kernel.kind)}};
    kernel["bandwidth"] = m.kernel.bandwidth ? json(*m.kernel.bandwidth) : json(nullptr);
    json hyper = {{"lambda", m.hyper.lambda}, {"eta", m.hyper.eta},   {"rho", m.hyper.rho},
                  {"p", m.hyper.p},           {"d", m.hyper.d},       {"t_max", m.hyper.t_max},
                  {"seed", m.hyper.seed}};
    hyper["fixed_mu"] = m.hyper.fixed_mu ? json(*m.hyper.fixed_mu) : json(nullptr);
    json norm = {{"mode", to_string(t.normalization.mode)}};
    if (t.normalization.mode == Normalization::zscore) {
        norm["mean"] = json_io::vector(t.normalization.mean);
        norm["stddev"] = json_io::vector(t.normalization.stddev);
    }
    json out = {{"schema", kModelSchema},
                {"schema_version", kModelSchemaVersion},
                {"classes", m.classes},
                {"source_count", m.source_count},
                {"original_labels", t.original_labels},
                {"kernel", std::move(kernel)},
                {"hyperparameters", std::move(hyper)},
                {"normalization", std::move(norm)},
                {"beta", json_io::matrix(m.beta)},
                {"train_features", json_io::matrix(m.train_features)}};
    out["feature_map"] = m.feature_map ? json_io::matrix(*m.feature_map) : json(nullptr);
    return out;
}

inline TrainedModel trained_model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<std::string>() != kModelSchema)
            throw ParseError("not a model file (schema '" + j.at("schema").get<std::string>() + "')");
        if (j.at("schema_version").get<int>() != kModelSchemaVersion)
            throw ParseError("unsupported model schema version " + std::to_string(j.at("schema_version").get<int>()));
        TrainedModel t;
        MedaModel& m = t.model;
        m.classes = j.at("classes").get<int>();
        m.source_count = j.at("source_count").get<Index>();
        t.original_labels = j.at("original_labels").get<std::vector<int>>();
        const auto& k = j.at("kernel");
        m.kernel.kind = k.at("kind").get<std::string>() == "linear" ? KernelSpec::Kind::linear : KernelSpec::Kind::rbf;
        if (!k.at("bandwidth").is_null()) m.kernel.bandwidth = k.at("bandwidth").get<double>();
        const auto& h = j.at("hyperparameters");
        m.hyper.lambda = h.at("lambda").get<double>();
        m.hyper.eta = h.at("eta").get<double>();
        m.hyper.rho = h.at("rho").get<double>();
        m.hyper.p = h.at("p").get<int>();
        m.hyper.d = h.at("d").get<Index>();
        m.hyper.t_max = h.at("t_max").get<int>();
        m.hyper.seed = h.at("seed").get<std::uint64_t>();
        if (!h.at("fixed_mu").is_null()) m.hyper.fixed_mu = h.at("fixed_mu").get<double>();
        const auto& n = j.at("normalization");
        t.normalization.mode = parse_normalization(n.at("mode").get<std::string>());
        if (t.normalization.mode == Normalization::zscore) {
            t.normalization.mean = json_io::vector(n.at("mean"));
            t.normalization.stddev = json_io::vector(n.at("stddev"));
        }
        m.beta = json_io::matrix(j.at("beta"));
        m.train_features = json_io::matrix(j.at("train_features"));
        if (!j.at("feature_map").is_null()) m.feature_map = json_io::matrix(j.at("feature_map"));
        if (m.beta.rows() != m.train_features.rows() || m.beta.cols() != m.classes)
            throw DimensionError("model coefficient shape does not match its training features");
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
}

inline void save_model(const std::string& path, const TrainedModel& t) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << to_json(t).dump() << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return trained_model_from_json(j);
}

/// Normalizes, maps onto the manifold and predicts raw feature rows. Labels come back
/// in the original label values of the training data.
inline Prediction predict_raw(const TrainedModel& t, const FeatureMatrix& raw) {
    const Index expected = t.model.feature_map ? t.model.feature_map->rows() : t.model.train_features.cols();
    if (raw.dim() != expected)
        throw DimensionError("input has " + std::to_string(raw.dim()) + " features, model expects " +
                             std::to_string(expected));
    auto [x, unused] = normalize(raw, t.normalization.mode, t.normalization);
    const Matrix z = t.model.feature_map ? Matrix(x.data * *t.model.feature_map) : x.data;
    Prediction p = predict(t.model, z);
    if (!t.original_labels.empty())
        for (int& y : p.labels) y = t.original_labels.at(static_cast<std::size_t>(y - 1));
    return p;
}

}  // namespace meda
