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

#include "qpatch/patch_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpatch {

std::vector<Patch> partition(const Spectrogram& spec, int patch_size) {
    if (patch_size < 2) throw InputError("patch size must be at least 2");
    if (spec.n_frames() < patch_size) {
        throw InputError("spectrogram too short for one patch: " + std::to_string(spec.n_frames()) +
                         " frames");
    }
    if (spec.n_mels() < patch_size) throw InputError("spectrogram has fewer mel bins than one patch");

    const Index time_strips = spec.n_frames() / patch_size;
    const Index freq_strips = spec.n_mels() / patch_size;
    std::vector<Patch> patches;
    patches.reserve(static_cast<std::size_t>(time_strips * freq_strips));
    for (Index t = 0; t < time_strips; ++t) {
        for (Index f = 0; f < freq_strips; ++f) {
            Patch p;
            p.values = spec.values.block(t * patch_size, f * patch_size, patch_size, patch_size);
            p.source.index = patches.size();
            p.source.time_index = static_cast<int>(t * patch_size);
            p.source.freq_index = static_cast<int>(f * patch_size);
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

VectorXd frequency_weights(const MatrixXd& patch) {
    const VectorXd shifted = patch.colwise().mean().transpose().cwiseAbs().array() + kEpsilon;
    return shifted / shifted.sum();
}

PatchSummary summarize(const Patch& p) {
    const MatrixXd& v = p.values;
    const Index frames = v.rows();
    const Index bins = v.cols();

    PatchSummary s;
    s.source = p.source;
    s.s1 = v.mean();

    const VectorXd w = frequency_weights(v);
    const VectorXd f = VectorXd::LinSpaced(bins, 0.0, static_cast<double>(bins - 1));
    s.s2 = f.dot(w);
    s.s3 = std::sqrt((f.array() - s.s2).square().matrix().dot(w));

    double coherence = 0.0;
    for (Index t = 0; t + 1 < frames; ++t) {
        const double num = v.row(t).dot(v.row(t + 1));
        const double den = v.row(t).norm() * v.row(t + 1).norm() + kEpsilon;
        coherence += num / den;
    }
    s.s4 = coherence / static_cast<double>(frames - 1);
    s.score = s.s1;
    return s;
}

std::vector<PatchSummary> select_top_k(std::span<const PatchSummary> summaries, std::size_t k) {
    if (k < 1) throw InputError("top-k requires k >= 1");
    if (k > summaries.size()) {
        throw InputError("top-k requested " + std::to_string(k) + " patches but only " +
                         std::to_string(summaries.size()) + " exist");
    }
    std::vector<std::size_t> order(summaries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto ranks_before = [&](std::size_t a, std::size_t b) {
        if (summaries[a].score != summaries[b].score) return summaries[a].score > summaries[b].score;
        return summaries[a].source.index < summaries[b].source.index;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), ranks_before);
    std::vector<PatchSummary> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(summaries[order[i]]);
    return out;
}

FeatureVector make_feature_vector(std::span<const PatchSummary> selected) {
    if (selected.empty()) throw InputError("feature vector needs at least one patch summary");
    FeatureVector x;
    x.values.resize(static_cast<Index>(selected.size()) * kSummaryDim);
    for (std::size_t j = 0; j < selected.size(); ++j) {
        x.values.segment<kSummaryDim>(static_cast<Index>(j) * kSummaryDim) = selected[j].vector();
        x.patch_order.push_back(selected[j].source);
    }
    return x;
}

FeatureVector extract_features(const Spectrogram& spec, const PatchConfig& config) {
    const std::vector<Patch> patches = partition(spec, config.size);
    std::vector<PatchSummary> summaries;
    summaries.reserve(patches.size());
    for (const auto& p : patches) summaries.push_back(summarize(p));
    if (config.top_k < 1) throw InputError("top_k must be at least 1");
    const auto selected = select_top_k(summaries, static_cast<std::size_t>(config.top_k));
    return make_feature_vector(selected);
}

}  // namespace qpatch
