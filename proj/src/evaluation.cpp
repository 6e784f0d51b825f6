// Copyright 2026 The Q-Patch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qpatch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qpatch/csv_io.hpp"

namespace qpatch {

namespace {

struct ClassCounts {
    std::size_t pos = 0;
    std::size_t neg = 0;
};

ClassCounts check_binary(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
    ClassCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) ++c.pos;
        else if (labels[i] == 0) ++c.neg;
        else throw InputError("metric labels must be 0 or 1");
        if (std::isnan(scores[i])) throw InputError("scores contain NaN");
    }
    if (c.pos == 0 || c.neg == 0) throw InputError("metric needs both classes present");
    return c;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
    const ClassCounts c = check_binary(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the Mann-Whitney U, kept integral: 2 per won pair, 1 per tie.
    std::uint64_t twice_u = 0;
    std::uint64_t neg_below = 0;
    for (std::size_t g = 0; g < order.size();) {
        std::size_t e = g;
        std::uint64_t pos_here = 0, neg_here = 0;
        while (e < order.size() && scores[order[e]] == scores[order[g]]) {
            (labels[order[e]] == 1 ? pos_here : neg_here) += 1;
            ++e;
        }
        twice_u += 2 * pos_here * neg_below + pos_here * neg_here;
        neg_below += neg_here;
        g = e;
    }
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
    const ClassCounts c = check_binary(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    const auto push = [&](double thr, std::size_t tp, std::size_t fp) {
        const double tpr = static_cast<double>(tp) / static_cast<double>(c.pos);
        roc.thresholds.push_back(thr);
        roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(c.neg));
        roc.tpr.push_back(tpr);
        roc.fnr.push_back(static_cast<double>(c.pos - tp) / static_cast<double>(c.pos));
    };
    push(std::numeric_limits<double>::infinity(), 0, 0);
    std::size_t tp = 0, fp = 0;
    for (std::size_t g = 0; g < order.size();) {
        const double thr = scores[order[g]];
        while (g < order.size() && scores[order[g]] == thr) {
            (labels[order[g]] == 1 ? tp : fp) += 1;
            ++g;
        }
        push(thr, tp, fp);
    }
    push(-std::numeric_limits<double>::infinity(), c.pos, c.neg);
    return roc;
}

EerResult eer(const RocCurve& roc) {
    if (roc.thresholds.empty()) throw InputError("empty ROC curve");
    for (std::size_t i = 0; i < roc.thresholds.size(); ++i) {
        if (roc.fpr[i] < roc.fnr[i]) continue;
        if (roc.fpr[i] == roc.fnr[i] || i == 0) return {roc.fpr[i], roc.thresholds[i]};
        const double d0 = roc.fnr[i - 1] - roc.fpr[i - 1];  // > 0
        const double d1 = roc.fnr[i] - roc.fpr[i];          // < 0
        const double t = d0 / (d0 - d1);
        const double rate = roc.fpr[i - 1] + t * (roc.fpr[i] - roc.fpr[i - 1]);
        const double lo = roc.thresholds[i - 1], hi = roc.thresholds[i];
        double thr;
        if (!std::isfinite(lo)) thr = hi;
        else if (!std::isfinite(hi)) thr = lo;
        else thr = lo + t * (hi - lo);
        return {rate, thr};
    }
    // Unreachable: the final operating point has fnr == 0.
    return {roc.fpr.back(), roc.thresholds.back()};
}

EerResult eer(std::span<const double> scores, std::span<const int> labels) {
    return eer(roc_curve(scores, labels));
}

// ---------------------------------------------------------------------------

nlohmann::json GroupStats::to_json() const {
    return {{"mean", mean}, {"std", std}, {"count", count}, {"delta_pct", delta_pct}};
}

nlohmann::json KernelStructureReport::to_json() const {
    nlohmann::json j = {{"bonafide_bonafide_same", bonafide_same.to_json()},
                        {"spoof_spoof_same", spoof_same.to_json()},
                        {"bonafide_bonafide_different", bonafide_different.to_json()},
                        {"spoof_spoof_different", spoof_different.to_json()},
                        {"bonafide_spoof", cross_class.to_json()}};
    for (std::size_t s = 0; s < cross_class_by_patch.size(); ++s) {
        j["bonafide_spoof_patch" + std::to_string(s + 1)] = cross_class_by_patch[s].to_json();
    }
    return j;
}

namespace {

GroupStats stats_of(const std::vector<double>& v) {
    GroupStats g;
    g.count = v.size();
    if (v.empty()) {
        g.mean = g.std = g.delta_pct = std::numeric_limits<double>::quiet_NaN();
        return g;
    }
    const double n = static_cast<double>(v.size());
    g.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - g.mean) * (x - g.mean);
    g.std = std::sqrt(ss / n);
    g.delta_pct = (g.mean - 1.0) * 100.0;
    return g;
}

std::vector<double> cross_entries(const MatrixXd& K, std::span<const int> labels) {
    std::vector<double> out;
    for (Index i = 0; i < K.rows(); ++i) {
        for (Index j = i + 1; j < K.cols(); ++j) {
            if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) out.push_back(K(i, j));
        }
    }
    return out;
}

}  // namespace

KernelStructureReport kernel_structure(const MatrixXd& K, std::span<const int> labels,
                                       std::span<const MatrixXd> patch_slot_kernels) {
    if (K.rows() != K.cols()) throw InputError("kernel matrix is not square");
    if (static_cast<Index>(labels.size()) != K.rows()) throw InputError("labels not aligned with kernel matrix");
    for (int y : labels) {
        if (y != 0 && y != 1) throw InputError("structure labels must be 0 or 1");
    }

    std::vector<double> same[2], different[2];
    for (Index i = 0; i < K.rows(); ++i) {
        const int yi = labels[static_cast<std::size_t>(i)];
        same[yi].push_back(K(i, i));
        for (Index j = i + 1; j < K.cols(); ++j) {
            if (labels[static_cast<std::size_t>(j)] == yi) different[yi].push_back(K(i, j));
        }
    }
    KernelStructureReport r;
    r.bonafide_same = stats_of(same[1]);
    r.spoof_same = stats_of(same[0]);
    r.bonafide_different = stats_of(different[1]);
    r.spoof_different = stats_of(different[0]);
    r.cross_class = stats_of(cross_entries(K, labels));
    for (const MatrixXd& S : patch_slot_kernels) {
        if (S.rows() != K.rows() || S.cols() != K.cols()) throw InputError("patch-slot kernel not aligned");
        r.cross_class_by_patch.push_back(stats_of(cross_entries(S, labels)));
    }
    return r;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const EvaluationResult& r) {
    nlohmann::json j = {{"schema_version", kReportSchemaVersion},
                        {"positive_class", "bonafide"},
                        {"score_orientation", "higher score = more bona fide"},
                        {"kernel_kind", r.kernel_kind},
                        {"auroc", r.auroc},
                        {"eer", r.eer.eer},
                        {"eer_threshold", r.eer.threshold},
                        {"roc_points", r.roc.thresholds.size()}};
    nlohmann::json ks = nlohmann::json::object();
    if (r.structure_dev) ks["dev"] = r.structure_dev->to_json();
    if (r.structure_all) ks["all"] = r.structure_all->to_json();
    j["kernel_structure"] = ks;
    j["model"] = r.extra;
    j["config"] = r.config;
    return j;
}

void write_report(const EvaluationResult& r, const std::filesystem::path& stem) {
    if (r.roc.thresholds.empty() || !std::isfinite(r.auroc) || !std::isfinite(r.eer.eer)) {
        throw InputError("refusing to write a report without AUROC, EER and ROC points");
    }
    const nlohmann::json j = to_json(r);
    CsvTable roc;
    roc.header = {"threshold", "fpr", "tpr", "fnr"};
    for (std::size_t i = 0; i < r.roc.thresholds.size(); ++i) {
        roc.rows.push_back({format_double(r.roc.thresholds[i]), format_double(r.roc.fpr[i]),
                            format_double(r.roc.tpr[i]), format_double(r.roc.fnr[i])});
    }
    auto json_path = stem;
    json_path += ".json";
    auto roc_path = stem;
    roc_path += "_roc.csv";
    write_csv(roc_path, roc);
    write_json(json_path, j);
}

}  // namespace qpatch
