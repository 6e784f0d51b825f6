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

// Experiment stages behind the `qpatch` CLI. Each stage reads only the files
// written by earlier stages inside the work directory:
//
//   synth       -> bonafide/ (synthetic only), spoof/, manifest.csv
//   features    -> features.csv (id, label, x0..x{4k-1}),
//                  patches.csv (selected patch locations per row)
//   kernel      -> kernel_<kind>_train.{csv,json}, kernel_<kind>_cross.{csv,json}
//   train-eval  -> model_<kind>.json, scores_<kind>.csv,
//                  report_<kind>.json, report_<kind>_roc.csv

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpatch/dsp_frontend.hpp"
#include "qpatch/evaluation.hpp"
#include "qpatch/kernel_learn.hpp"
#include "qpatch/patch_features.hpp"
#include "qpatch/quantum_embed.hpp"
#include "qpatch/spoof_synth.hpp"

namespace qpatch {

struct ExperimentConfig {
    std::filesystem::path input_dir;               // bona fide WAVs (unused when synthetic)
    std::filesystem::path work_dir = "qpatch_work";
    int synthetic_audio = 0;                       // > 0: generate this many bona fide clips
    double synthetic_seconds = 1.5;
    std::uint64_t seed = 7;

    FrontendConfig frontend;
    PatchConfig patch;
    EmbeddingConfig embedding;
    SpoofConfig spoof;  // seed field is overwritten by `seed`
    DatasetCounts counts;
    double svm_C = 1.0;
    std::optional<double> gamma;  // empty: "scale" heuristic on training features

    nlohmann::json to_json() const;

    /// Overlays the keys present in `j` onto this config.
    void merge_json(const nlohmann::json& j);

    /// Range checks shared by all stages; throws InputError.
    void validate() const;

    SpoofConfig spoof_config() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// One row of features.csv.
struct FeatureRecord {
    std::string id;
    Label label = Label::Bonafide;
    VectorXd values;
    std::vector<PatchLocation> patches;
};

void write_features(const std::filesystem::path& path, const std::vector<FeatureRecord>& rows);
/// Patch locations are not stored in features.csv and come back empty.
std::vector<FeatureRecord> read_features(const std::filesystem::path& path);
void write_patch_locations(const std::filesystem::path& path, const std::vector<FeatureRecord>& rows);

/// Audio -> feature vector with the configured front end and patch settings.
FeatureVector features_from_waveform(const Waveform& w, const ExperimentConfig& cfg);

DatasetManifest cmd_synth(const ExperimentConfig& cfg);

struct FeaturesResult {
    std::vector<FeatureRecord> rows;
    std::vector<std::string> skipped;  // ids whose audio could not be processed
};
FeaturesResult cmd_features(const ExperimentConfig& cfg);

struct KernelResult {
    GramMatrix train;
    MatrixXd cross;  // dev x train
    std::vector<std::string> train_ids;
    std::vector<std::string> dev_ids;
    KernelSpec spec;
};
KernelResult cmd_kernel(const ExperimentConfig& cfg, KernelKind kind);

EvaluationResult cmd_train_eval(const ExperimentConfig& cfg, KernelKind kind);

struct RunAllResult {
    EvaluationResult quantum;
    EvaluationResult rbf;
    std::size_t skipped = 0;
};
RunAllResult cmd_run_all(const ExperimentConfig& cfg);

}  // namespace qpatch
