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

// Controlled spoof generation (additive white noise at a target SNR followed
// by a first-order spectral tilt), a synthetic speech-like source for
// self-contained runs, and the balanced train/dev manifest.

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "qpatch/dsp_frontend.hpp"
#include "qpatch/rng.hpp"

namespace qpatch {

struct SpoofConfig {
    double snr_db = 20.0;  // +inf disables the noise stage
    double tilt_min = -0.6;
    double tilt_max = 0.6;
    std::uint64_t seed = 7;
};

void validate(const SpoofConfig& config);

struct NoiseResult {
    Waveform audio;
    double clipped_fraction = 0.0;  // share of samples clipped to [-1, 1]
};

/// x + g, with white Gaussian g scaled so that the signal-to-noise power
/// ratio is exactly `snr_db` before clipping.
NoiseResult add_noise(const Waveform& w, double snr_db, Rng& rng);

/// y[n] = x[n] - tilt x[n-1], rescaled to the input RMS. The rescale is
/// skipped (with a warning) when the filtered RMS is below 1e-6.
Waveform spectral_distort(const Waveform& w, double tilt);

double rms(const VectorXd& x);

/// Harmonic complex with vibrato and syllable-like amplitude envelope, plus a
/// faint room-noise floor. A pure function of (seed, duration).
Waveform synthesize_utterance(std::uint64_t seed, double seconds = 1.5,
                              int sample_rate = kTargetSampleRate);

enum class Label { Bonafide, Spoof };
enum class Split { Train, Dev };

std::string to_string(Label label);
std::string to_string(Split split);
Label parse_label(const std::string& s);
Split parse_split(const std::string& s);

struct ManifestEntry {
    std::string id;
    std::string path;  // relative to the manifest directory when inside it
    Label label = Label::Bonafide;
    Split split = Split::Train;
    std::string source_id;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::uint64_t seed = 0;
};

struct DatasetCounts {
    int n_bonafide = 50;       // one spoof is generated per bona fide file
    double train_fraction = 0.8;

    int train_per_class() const;
};

/// Selects the first `counts.n_bonafide` WAV files of `bonafide_dir` in
/// sorted filename order, writes one spoof each under `out_dir/spoof/`, and
/// assigns splits with a seeded per-class shuffle. Writes
/// `out_dir/manifest.csv` and returns the manifest.
DatasetManifest build_dataset(const std::filesystem::path& bonafide_dir, const SpoofConfig& config,
                              const DatasetCounts& counts, const std::filesystem::path& out_dir);

/// Header `id,path,label,split,source_id`.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace qpatch
