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

// Dataset ingestion: dense and sparse text loaders, normalization fitted on the source
// domain, label re-indexing, and seeded synthetic domain-shift tasks.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "meda/error.hpp"
#include "meda/linalg.hpp"
#include "meda/types.hpp"

namespace meda {

/// dense:  one sample per line, values separated by commas or whitespace, label last.
/// sparse: "label idx:value idx:value ..." with 1-based feature indices.
enum class Format { dense, sparse };

inline Format parse_format(std::string_view s) {
    if (s == "dense" || s == "csv") return Format::dense;
    if (s == "sparse" || s == "libsvm") return Format::sparse;
    throw InvalidArgument("unknown format '" + std::string(s) + "'");
}

inline const char* to_string(Format f) { return f == Format::dense ? "dense" : "sparse"; }

struct LoadOptions {
    Format format = Format::dense;
    bool labeled = true;
    Index dim = 0;  // sparse only; 0 infers the largest index seen
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == ',' || line[pos] == ';'))
            ++pos;
        if (pos >= line.size()) break;
        std::size_t end = pos;
        while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != ',' && line[end] != ';')
            ++end;
        out.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

inline double parse_double(std::string_view field, std::size_t line_no) {
    double v = 0.0;
    const char* first = field.data();
    if (!field.empty() && field.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
    return v;
}

inline int parse_label(std::string_view field, std::size_t line_no) {
    const double v = parse_double(field, line_no);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ParseError("line " + std::to_string(line_no) + ": label '" + std::string(field) +
                         "' is not an integer");
    return static_cast<int>(v);
}

inline void write_double(std::ostream& os, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, res.ptr - buf);
}

}  // namespace detail

inline FeatureMatrix parse_dataset(std::istream& in, const LoadOptions& opt = {}) {
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<std::pair<Index, double>>> sparse_rows;
    Labels labels;
    Index width = -1;
    Index max_index = 0;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = detail::split_fields(line);

        if (opt.format == Format::dense) {
            const Index cols = static_cast<Index>(fields.size()) - (opt.labeled ? 1 : 0);
            if (cols < 1) throw ParseError("line " + std::to_string(line_no) + ": no feature values");
            if (width >= 0 && cols != width)
                throw DimensionError("line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(width) + " features, found " + std::to_string(cols));
            width = cols;
            std::vector<double> row(static_cast<std::size_t>(cols));
            for (Index k = 0; k < cols; ++k) row[k] = detail::parse_double(fields[k], line_no);
            if (opt.labeled) labels.push_back(detail::parse_label(fields.back(), line_no));
            rows.push_back(std::move(row));
        } else {
            std::size_t first = 0;
            if (opt.labeled) {
                if (fields.empty() || fields[0].find(':') != std::string_view::npos)
                    throw ParseError("line " + std::to_string(line_no) + ": missing leading label");
                labels.push_back(detail::parse_label(fields[0], line_no));
                first = 1;
            }
            std::vector<std::pair<Index, double>> entries;
            for (std::size_t k = first; k < fields.size(); ++k) {
                const auto colon = fields[k].find(':');
                if (colon == std::string_view::npos)
                    throw ParseError("line " + std::to_string(line_no) + ": expected index:value, got '" +
                                     std::string(fields[k]) + "'");
                const double idx = detail::parse_double(fields[k].substr(0, colon), line_no);
                if (idx < 1 || idx != std::floor(idx))
                    throw ParseError("line " + std::to_string(line_no) + ": bad feature index");
                const Index i = static_cast<Index>(idx);
                if (opt.dim > 0 && i > opt.dim)
                    throw DimensionError("line " + std::to_string(line_no) + ": feature index " +
                                         std::to_string(i) + " exceeds dimension " + std::to_string(opt.dim));
                max_index = std::max(max_index, i);
                entries.emplace_back(i - 1, detail::parse_double(fields[k].substr(colon + 1), line_no));
            }
            sparse_rows.push_back(std::move(entries));
        }
    }

    FeatureMatrix out;
    if (opt.format == Format::dense) {
        if (rows.empty()) throw EmptyInputError("dataset has no samples");
        out.data.resize(static_cast<Index>(rows.size()), width);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (Index k = 0; k < width; ++k) out.data(static_cast<Index>(i), k) = rows[i][k];
    } else {
        if (sparse_rows.empty()) throw EmptyInputError("dataset has no samples");
        const Index dim = opt.dim > 0 ? opt.dim : max_index;
        if (dim < 1) throw DimensionError("sparse dataset has no feature indices");
        out.data = Matrix::Zero(static_cast<Index>(sparse_rows.size()), dim);
        for (std::size_t i = 0; i < sparse_rows.size(); ++i)
            for (const auto& [k, v] : sparse_rows[i]) out.data(static_cast<Index>(i), k) = v;
    }
    if (opt.labeled) out.labels = std::move(labels);
    return out;
}

inline FeatureMatrix load_dataset(const std::string& path, const LoadOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return parse_dataset(in, opt);
    } catch (const Error& e) {
        if (e.category() == ErrorCategory::parse) throw ParseError(path + ": " + e.what());
        if (e.category() == ErrorCategory::dimension) throw DimensionError(path + ": " + e.what());
        throw;
    }
}

/// Writes the shortest decimal form of every value, so a save/load cycle is exact.
inline void write_dataset(std::ostream& os, const FeatureMatrix& x, Format format) {
    x.check();
    for (Index i = 0; i < x.rows(); ++i) {
        if (format == Format::dense) {
            for (Index k = 0; k < x.dim(); ++k) {
                if (k) os << ',';
                detail::write_double(os, x.data(i, k));
            }
            if (x.labels) os << ',' << (*x.labels)[static_cast<std::size_t>(i)];
        } else {
            bool first = true;
            if (x.labels) {
                os << (*x.labels)[static_cast<std::size_t>(i)];
                first = false;
            }
            for (Index k = 0; k < x.dim(); ++k) {
                if (x.data(i, k) == 0.0) continue;
                if (!first) os << ' ';
                first = false;
                os << (k + 1) << ':';
                detail::write_double(os, x.data(i, k));
            }
        }
        os << '\n';
    }
}

inline void save_dataset(const std::string& path, const FeatureMatrix& x, Format format) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_dataset(out, x, format);
    if (!out) throw IoError("failed writing '" + path + "'");
}

enum class Normalization { none, zscore, unit_l2 };

inline Normalization parse_normalization(std::string_view s) {
    if (s == "none") return Normalization::none;
    if (s == "zscore") return Normalization::zscore;
    if (s == "unit_l2" || s == "l2") return Normalization::unit_l2;
    throw InvalidArgument("unknown normalization '" + std::string(s) + "'");
}

inline const char* to_string(Normalization n) {
    switch (n) {
        case Normalization::none: return "none";
        case Normalization::zscore: return "zscore";
        case Normalization::unit_l2: return "unit_l2";
    }
    return "none";
}

struct NormalizationStats {
    Normalization mode = Normalization::none;
    Vector mean;    // zscore only
    Vector stddev;  // zscore only; 1 where the fitted feature had zero variance
    std::vector<Index> constant_features;
};

/// zscore fits per-feature mean and (population) std on `x` unless `stats` is given;
/// zero-variance features are centered but left unscaled and listed in the stats.
/// unit_l2 scales each row to unit Euclidean norm.
inline std::pair<FeatureMatrix, NormalizationStats> normalize(
    const FeatureMatrix& x, Normalization mode, const std::optional<NormalizationStats>& stats = {}) {
    FeatureMatrix out = x;
    NormalizationStats st;
    st.mode = mode;
    switch (mode) {
        case Normalization::none:
            break;
        case Normalization::zscore: {
            if (stats && stats->mode == Normalization::zscore) {
                st = *stats;
                if (st.mean.size() != x.dim()) throw DimensionError("normalization stats dimension mismatch");
            } else {
                if (x.rows() < 1) throw EmptyInputError("cannot fit normalization on no samples");
                st.mean = x.data.colwise().mean().transpose();
                st.stddev = ((x.data.rowwise() - st.mean.transpose()).array().square().colwise().mean())
                                .sqrt()
                                .transpose();
                for (Index k = 0; k < st.stddev.size(); ++k)
                    if (!(st.stddev(k) > 0.0)) {
                        st.stddev(k) = 1.0;
                        st.constant_features.push_back(k);
                    }
            }
            out.data = (x.data.rowwise() - st.mean.transpose()).array().rowwise() /
                       st.stddev.transpose().array();
            break;
        }
        case Normalization::unit_l2:
            for (Index i = 0; i < x.rows(); ++i) {
                const double norm = x.data.row(i).norm();
                if (!(norm > 0.0))
                    throw DegenerateError("row " + std::to_string(i) + " is zero and has no unit-norm scaling");
                out.data.row(i) /= norm;
            }
            break;
    }
    return {std::move(out), std::move(st)};
}

struct DatasetPair {
    FeatureMatrix source;  // labeled
    FeatureMatrix target;  // labels, when present, are ground truth held out for scoring
    std::string name;
    Normalization normalization = Normalization::none;
    NormalizationStats stats;
    std::vector<int> original_labels;  // original_labels[c - 1] is the input label of class c
};

/// Re-indexes labels onto {1..C} using the source label set, normalizes both domains
/// with source-fitted statistics, and rejects all-zero rows.
inline DatasetPair make_dataset_pair(FeatureMatrix source, FeatureMatrix target, std::string name,
                                     Normalization mode) {
    if (!source.labels) throw InvalidArgument("source dataset must be labeled");
    source.check();
    target.check();
    if (source.dim() != target.dim())
        throw DimensionError("source has " + std::to_string(source.dim()) + " features, target has " +
                             std::to_string(target.dim()));
    source.domain = Domain::source;
    target.domain = Domain::target;

    DatasetPair pair;
    pair.name = std::move(name);
    pair.normalization = mode;
    std::map<int, int> index;
    for (int y : *source.labels) index.emplace(y, 0);
    for (auto& [orig, mapped] : index) {
        pair.original_labels.push_back(orig);
        mapped = static_cast<int>(pair.original_labels.size());
    }
    auto remap = [&index](Labels& ys, const char* which) {
        for (int& y : ys) {
            const auto it = index.find(y);
            if (it == index.end())
                throw InvalidArgument(std::string(which) + " label " + std::to_string(y) +
                                      " does not occur in the source domain");
            y = it->second;
        }
    };
    remap(*source.labels, "source");
    if (target.labels) remap(*target.labels, "target");

    auto [src_n, stats] = normalize(source, mode);
    auto [tgt_n, unused] = normalize(target, mode, stats);
    for (const FeatureMatrix* f : {&src_n, &tgt_n})
        for (Index i = 0; i < f->rows(); ++i)
            if (f->data.row(i).cwiseAbs().maxCoeff() == 0.0)
                throw DegenerateError(std::string(to_string(f->domain)) + " row " + std::to_string(i) +
                                      " is all zero after normalization");
    pair.source = std::move(src_n);
    pair.target = std::move(tgt_n);
    pair.stats = std::move(stats);
    return pair;
}

/// Gaussian class clusters. Source class c is N(mean_c, noise^2 I); target class c is
/// N(mean_c + conditional_shift[c] + marginal_shift, (noise^2 + target_extra_noise^2) I).
/// Class means are i.i.d. N(0, class_spread^2 I).
struct SyntheticTaskSpec {
    Index n_per_class = 100;
    int classes = 3;
    Index dim = 10;
    double class_spread = 3.0;
    Vector marginal_shift;                 // empty means zero
    std::vector<Vector> conditional_shift; // empty means zero; else one per class
    double noise_sigma = 1.0;
    double target_extra_noise = 0.0;
    std::uint64_t seed = kDefaultSeed;
};

struct SyntheticTask {
    DatasetPair pair;
    Matrix class_means;  // classes x dim
};

inline SyntheticTask generate_synthetic_task(const SyntheticTaskSpec& spec) {
    if (spec.n_per_class < 1 || spec.classes < 1 || spec.dim < 1)
        throw InvalidArgument("synthetic task needs positive sizes");
    if (spec.marginal_shift.size() != 0 && spec.marginal_shift.size() != spec.dim)
        throw DimensionError("marginal shift dimension mismatch");
    if (!spec.conditional_shift.empty() &&
        static_cast<int>(spec.conditional_shift.size()) != spec.classes)
        throw DimensionError("conditional shift needs one offset per class");
    for (const Vector& v : spec.conditional_shift)
        if (v.size() != spec.dim) throw DimensionError("conditional shift dimension mismatch");

    Rng rng(spec.seed);
    SyntheticTask task;
    task.class_means = spec.class_spread * rng.normal_matrix(spec.classes, spec.dim);
    const Index rows = spec.n_per_class * spec.classes;
    const double target_sigma =
        std::sqrt(spec.noise_sigma * spec.noise_sigma + spec.target_extra_noise * spec.target_extra_noise);

    auto draw = [&](bool target) {
        FeatureMatrix f;
        f.domain = target ? Domain::target : Domain::source;
        f.data.resize(rows, spec.dim);
        Labels y(static_cast<std::size_t>(rows));
        Index r = 0;
        for (int c = 0; c < spec.classes; ++c) {
            Vector center = task.class_means.row(c).transpose();
            if (target) {
                if (spec.marginal_shift.size()) center += spec.marginal_shift;
                if (!spec.conditional_shift.empty()) center += spec.conditional_shift[c];
            }
            const double sigma = target ? target_sigma : spec.noise_sigma;
            for (Index i = 0; i < spec.n_per_class; ++i, ++r) {
                for (Index k = 0; k < spec.dim; ++k) f.data(r, k) = center(k) + sigma * rng.normal();
                y[static_cast<std::size_t>(r)] = c + 1;
            }
        }
        f.labels = std::move(y);
        return f;
    };
    FeatureMatrix source = draw(false);
    FeatureMatrix target = draw(true);
    task.pair = make_dataset_pair(std::move(source), std::move(target),
                                  "synthetic-" + std::to_string(spec.seed), Normalization::none);
    return task;
}

inline DatasetPair generate_synthetic(const SyntheticTaskSpec& spec) {
    return generate_synthetic_task(spec).pair;
}

/// The benchmark's shifted-Gaussians task: 3 classes in 10 dimensions, 100 samples per
/// class and domain, class means with spread 2, unit noise, a global target offset of
/// length 8 and a per-class offset of length 2, both in seeded random directions.
inline SyntheticTaskSpec standard_synthetic_spec(std::uint64_t seed = kDefaultSeed) {
    SyntheticTaskSpec spec;
    spec.n_per_class = 100;
    spec.classes = 3;
    spec.dim = 10;
    spec.class_spread = 2.0;
    spec.noise_sigma = 1.0;
    spec.seed = seed;
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    spec.marginal_shift = 8.0 * rng.normal_matrix(spec.dim, 1).col(0).normalized();
    for (int c = 0; c < spec.classes; ++c)
        spec.conditional_shift.push_back(2.0 * rng.normal_matrix(spec.dim, 1).col(0).normalized());
    return spec;
}

/// Per-class offsets that move class c onto the mean of class c+1 (cyclically). The
/// target marginal then matches the source marginal while every class moves.
inline std::vector<Vector> class_rotation_shift(const Matrix& class_means) {
    std::vector<Vector> out;
    const Index classes = class_means.rows();
    for (Index c = 0; c < classes; ++c)
        out.push_back((class_means.row((c + 1) % classes) - class_means.row(c)).transpose());
    return out;
}

}  // namespace meda
