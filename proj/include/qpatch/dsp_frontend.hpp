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

// Log-mel front end: resampling, STFT, mel filterbank energies, log
// compression and per-utterance standardization.

#pragma once

#include <filesystem>

#include "qpatch/common.hpp"

namespace qpatch {

inline constexpr int kTargetSampleRate = 16000;

/// Mono audio. Samples are nominally in [-1, 1].
struct Waveform {
    VectorXd samples;
    int sample_rate = kTargetSampleRate;
};

/// Throws InputError unless the waveform is non-empty, finite and has a
/// positive sample rate.
void validate(const Waveform& w);

/// Standardized log-mel matrix, one row per frame, one column per mel bin.
struct Spectrogram {
    MatrixXd values;

    Index n_frames() const { return values.rows(); }
    Index n_mels() const { return values.cols(); }
};

/// Triangular filters over the non-negative FFT bins (rows = filters).
struct MelFilterbank {
    MatrixXd weights;      // n_mels x (fft_size/2 + 1)
    VectorXd centers_hz;   // one center frequency per filter
    int fft_size = 1024;
    int sample_rate = kTargetSampleRate;
    double f_low = 0.0;
    double f_high = 8000.0;
};

struct FrontendConfig {
    int sample_rate = kTargetSampleRate;
    double win_ms = 25.0;
    double hop_ms = 10.0;
    int fft_size = 1024;
    int n_mels = 64;
    double f_low = 0.0;
    double f_high = 8000.0;

    int win_length() const;
    int hop_length() const;
};

/// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Periodic Hann window, w[n] = 0.5 (1 - cos(2 pi n / L)).
VectorXd hann_window(int length);

/// Windowed-sinc polyphase resampling to `target_rate`. Audio already at the
/// target rate is returned untouched.
Waveform resample(const Waveform& w, int target_rate = kTargetSampleRate);

/// Short-time Fourier transform. One row per frame; frames that would run
/// past the end of the signal are dropped. Only the fft_size/2 + 1
/// non-negative-frequency bins are kept.
MatrixXcd stft(const Waveform& w, double win_ms, double hop_ms, int fft_size);

MelFilterbank build_mel_filterbank(int n_mels = 64, int fft_size = 1024,
                                   int sample_rate = kTargetSampleRate,
                                   double f_low = 0.0, double f_high = 8000.0);

/// E(tau, f) = sum_k |X(tau, k)|^2 H_f(k), frames x n_mels.
MatrixXd mel_energies(const MatrixXcd& stft_out, const MelFilterbank& fb);

/// log(E + eps), then (M - mean) / (std + eps) over the whole matrix.
Spectrogram log_standardize(const MatrixXd& energies);

/// The whole chain: resample, STFT, mel energies, log + standardize.
Spectrogram compute_spectrogram(const Waveform& w, const FrontendConfig& config = {});

/// Writes `<stem>.csv` (one frame per row) and `<stem>.json` (front-end
/// configuration and epsilon).
void save_spectrogram(const Spectrogram& spec, const FrontendConfig& config,
                      const std::filesystem::path& stem);

}  // namespace qpatch
