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

// Detection metrics (AUROC, EER) and kernel-similarity structure.
//
// Labels are 1 for the positive class (bona fide) and 0 for spoof; scores
// are oriented so that higher means more bona fide. A sample is accepted at
// threshold tau when score >= tau.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpatch/common.hpp"

namespace qpatch {

inline constexpr int kReportSchemaVersion = 1;

/// Mann-Whitney estimate: share of (positive, negative) pairs ranked
/// correctly, ties counted as one half.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct RocCurve {
    // Ordered by descending threshold: +inf first (nothing accepted), then
    // every distinct score, then -inf (everything accepted).
    std::vector<double> thresholds;
    std::vector<double> fpr;
    std::vector<double> tpr;
    std::vector<double> fnr;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

struct EerResult {
    double eer = 0.0;
    double threshold = 0.0;
};

/// Crossing of FPR and FNR on the empirical ROC, linearly interpolated
/// between the two neighbouring operating points when no threshold hits it
/// exactly.
EerResult eer(std::span<const double> scores, std::span<const int> labels);
EerResult eer(const RocCurve& roc);

struct GroupStats {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
    double delta_pct = 0.0;  // (mean - 1) * 100, relative to self-similarity

    nlohmann::json to_json() const;
};

/// Group statistics of a kernel matrix in the layout of a similarity table:
/// self-similarity per class, within-class pairs of distinct samples, and
/// cross-class pairs (optionally repeated on single-patch kernels).
struct KernelStructureReport {
    GroupStats bonafide_same;
    GroupStats spoof_same;
    GroupStats bonafide_different;
    GroupStats spoof_different;
    GroupStats cross_class;
    std::vector<GroupStats> cross_class_by_patch;  // one per patch slot

    nlohmann::json to_json() const;
};

/// Diagonal entries feed only the "same" groups; every unordered pair of
/// distinct samples is counted once. `patch_slot_kernels` are optional
/// single-patch Gram matrices aligned with K.
KernelStructureReport kernel_structure(const MatrixXd& K, std::span<const int> labels,
                                       std::span<const MatrixXd> patch_slot_kernels = {});

struct EvaluationResult {
    std::string kernel_kind;
    double auroc = std::numeric_limits<double>::quiet_NaN();
    EerResult eer;
    RocCurve roc;
    std::optional<KernelStructureReport> structure_dev;
    std::optional<KernelStructureReport> structure_all;
    nlohmann::json extra = nlohmann::json::object();   // model summary, counts
    nlohmann::json config = nlohmann::json::object();  // config echo
};

nlohmann::json to_json(const EvaluationResult& r);

/// Writes `<stem>.json` (schema_version 1) and `<stem>_roc.csv` with header
/// `threshold,fpr,tpr,fnr`. Validates everything before writing, so a failed
/// call leaves no partial files.
void write_report(const EvaluationResult& r, const std::filesystem::path& stem);

}  // namespace qpatch
