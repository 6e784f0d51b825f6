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

// Patch partitioning of a standardized spectrogram, the four-statistic patch
// summary, top-k selection and the concatenated feature vector.

#pragma once

#include <span>
#include <vector>

#include "qpatch/dsp_frontend.hpp"

namespace qpatch {

inline constexpr int kDefaultPatchSize = 4;
inline constexpr int kSummaryDim = 4;

/// Where a patch came from: its position in partition order plus the frame
/// and mel bin of its top-left corner.
struct PatchLocation {
    std::size_t index = 0;
    int time_index = 0;
    int freq_index = 0;
};

struct Patch {
    MatrixXd values;  // size x size, rows = frames, cols = mel bins
    PatchLocation source;
};

struct PatchSummary {
    double s1 = 0.0;  // mean activation
    double s2 = 0.0;  // spectral centroid, local bin units
    double s3 = 0.0;  // spectral bandwidth, local bin units
    double s4 = 0.0;  // inter-frame coherence
    double score = 0.0;
    PatchLocation source;

    Eigen::Vector4d vector() const { return {s1, s2, s3, s4}; }
};

struct FeatureVector {
    VectorXd values;  // length 4k, block j = (s1, s2, s3, s4) of the j-th pick
    std::vector<PatchLocation> patch_order;

    Index n_patches() const { return values.size() / kSummaryDim; }
};

struct PatchConfig {
    int size = kDefaultPatchSize;
    int top_k = 2;
};

/// Non-overlapping size x size patches in time-major order. Trailing frames
/// and bins that do not fill a whole patch are dropped.
std::vector<Patch> partition(const Spectrogram& spec, int patch_size = kDefaultPatchSize);

/// Frequency weights w_f = (|m_f| + eps) / sum(|m_f'| + eps), where m_f is
/// the column mean of the patch.
VectorXd frequency_weights(const MatrixXd& patch);

PatchSummary summarize(const Patch& p);

/// The k summaries with the largest score, ordered by descending score and
/// then ascending patch index.
std::vector<PatchSummary> select_top_k(std::span<const PatchSummary> summaries, std::size_t k);

FeatureVector make_feature_vector(std::span<const PatchSummary> selected);

/// partition -> summarize -> select_top_k -> make_feature_vector.
FeatureVector extract_features(const Spectrogram& spec, const PatchConfig& config = {});

}  // namespace qpatch
