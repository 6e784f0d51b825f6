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

#include "qpatch/dsp_frontend.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "qpatch/csv_io.hpp"

namespace qpatch {

void validate(const Waveform& w) {
    if (w.sample_rate <= 0) throw InputError("sample rate must be positive");
    if (w.samples.size() == 0) throw InputError("waveform is empty");
    if (!w.samples.allFinite()) throw InputError("waveform contains non-finite samples");
}

int FrontendConfig::win_length() const {
    return static_cast<int>(std::lround(sample_rate * win_ms / 1000.0));
}

int FrontendConfig::hop_length() const {
    return static_cast<int>(std::lround(sample_rate * hop_ms / 1000.0));
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

VectorXd hann_window(int length) {
    VectorXd w(length);
    for (int n = 0; n < length; ++n) {
        w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / length));
    }
    return w;
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

constexpr int kSincZeroCrossings = 16;
constexpr double kKaiserBeta = 8.6;

double kaiser(double x, double half_width) {
    const double r = x / half_width;
    if (std::abs(r) >= 1.0) return 0.0;
    return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
           std::cyl_bessel_i(0.0, kKaiserBeta);
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace

Waveform resample(const Waveform& w, int target_rate) {
    validate(w);
    if (target_rate <= 0) throw InputError("target sample rate must be positive");
    if (w.sample_rate == target_rate) return w;

    const int g = std::gcd(w.sample_rate, target_rate);
    const long up = target_rate / g;
    const long down = w.sample_rate / g;
    // Cutoff relative to the input Nyquist; lowered when decimating.
    const double cutoff = std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
    const double half_width = kSincZeroCrossings / cutoff;
    const long taps_each_side = static_cast<long>(std::ceil(half_width));
    const long n_taps = 2 * taps_each_side;

    // phase p covers output positions with fractional input offset p / up;
    // tap t multiplies x[i0 + t - taps_each_side + 1].
    MatrixXd table(up, n_taps);
    for (long p = 0; p < up; ++p) {
        const double frac = static_cast<double>(p) / static_cast<double>(up);
        for (long t = 0; t < n_taps; ++t) {
            const double offset = frac - static_cast<double>(t - taps_each_side + 1);
            table(p, t) = cutoff * sinc(cutoff * offset) * kaiser(offset, half_width);
        }
    }

    const Index in_len = w.samples.size();
    const auto out_len = static_cast<Index>((static_cast<long>(in_len) * up + down - 1) / down);
    Waveform out;
    out.sample_rate = target_rate;
    out.samples.resize(out_len);
    for (Index n = 0; n < out_len; ++n) {
        const long pos = static_cast<long>(n) * down;
        const long i0 = pos / up;
        const long phase = pos % up;
        double acc = 0.0;
        for (long t = 0; t < n_taps; ++t) {
            const long idx = i0 + t - taps_each_side + 1;
            if (idx < 0 || idx >= static_cast<long>(in_len)) continue;
            acc += w.samples[static_cast<Index>(idx)] * table(phase, t);
        }
        out.samples[n] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// STFT and mel energies

MatrixXcd stft(const Waveform& w, double win_ms, double hop_ms, int fft_size) {
    validate(w);
    const int win_len = static_cast<int>(std::lround(w.sample_rate * win_ms / 1000.0));
    const int hop_len = static_cast<int>(std::lround(w.sample_rate * hop_ms / 1000.0));
    if (win_len < 1 || hop_len < 1) throw InputError("window and hop must span at least one sample");
    if (fft_size < win_len) throw InputError("fft_size must be at least the window length in samples");
    const Index len = w.samples.size();
    if (len < win_len) {
        throw InputError("signal too short: " + std::to_string(len) + " samples, window needs " +
                         std::to_string(win_len));
    }

    const Index n_frames = (len - win_len) / hop_len + 1;
    const Index n_bins = fft_size / 2 + 1;
    const VectorXd window = hann_window(win_len);

    Eigen::FFT<double> fft;
    std::vector<double> frame(static_cast<std::size_t>(fft_size), 0.0);
    std::vector<std::complex<double>> spectrum;
    MatrixXcd out(n_frames, n_bins);
    for (Index t = 0; t < n_frames; ++t) {
        const Index start = t * hop_len;
        for (int n = 0; n < win_len; ++n) frame[n] = w.samples[start + n] * window[n];
        fft.fwd(spectrum, frame);
        for (Index k = 0; k < n_bins; ++k) out(t, k) = spectrum[static_cast<std::size_t>(k)];
    }
    return out;
}

MelFilterbank build_mel_filterbank(int n_mels, int fft_size, int sample_rate, double f_low,
                                   double f_high) {
    if (n_mels < 1) throw InputError("n_mels must be at least 1");
    if (fft_size < 2) throw InputError("fft_size must be at least 2");
    if (sample_rate <= 0) throw InputError("sample rate must be positive");
    if (!(f_low >= 0.0 && f_low < f_high && f_high <= sample_rate / 2.0)) {
        throw InputError("mel band edges must satisfy 0 <= f_low < f_high <= sample_rate / 2");
    }

    const double mel_lo = hz_to_mel(f_low);
    const double mel_hi = hz_to_mel(f_high);
    VectorXd edges(n_mels + 2);
    for (int i = 0; i < n_mels + 2; ++i) {
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));
    }

    MelFilterbank fb;
    fb.fft_size = fft_size;
    fb.sample_rate = sample_rate;
    fb.f_low = f_low;
    fb.f_high = f_high;
    fb.centers_hz = edges.segment(1, n_mels);
    const Index n_bins = fft_size / 2 + 1;
    fb.weights = MatrixXd::Zero(n_mels, n_bins);
    for (int m = 0; m < n_mels; ++m) {
        const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
        for (Index k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / fft_size;
            const double rise = (f - left) / (center - left);
            const double fall = (right - f) / (right - center);
            fb.weights(m, k) = std::max(0.0, std::min(rise, fall));
        }
        if (fb.weights.row(m).maxCoeff() <= 0.0) {
            throw InputError("mel filter " + std::to_string(m) +
                             " covers no FFT bin; use fewer mels or a larger fft_size");
        }
    }
    return fb;
}

MatrixXd mel_energies(const MatrixXcd& stft_out, const MelFilterbank& fb) {
    if (stft_out.cols() != fb.weights.cols()) {
        throw InputError("STFT has " + std::to_string(stft_out.cols()) + " bins, filterbank expects " +
                         std::to_string(fb.weights.cols()));
    }
    const MatrixXd power = stft_out.cwiseAbs2();
    return power * fb.weights.transpose();
}

Spectrogram log_standardize(const MatrixXd& energies) {
    const MatrixXd logm = (energies.array() + kEpsilon).log().matrix();
    Spectrogram spec;
    if (logm.size() == 0 || logm.maxCoeff() == logm.minCoeff()) {
        // sigma = 0: every centered entry is exactly zero.
        spec.values = MatrixXd::Zero(logm.rows(), logm.cols());
        return spec;
    }
    const double n = static_cast<double>(logm.size());
    const double mean = logm.mean();
    const double var = (logm.array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    spec.values = ((logm.array() - mean) / (sd + kEpsilon)).matrix();
    return spec;
}

Spectrogram compute_spectrogram(const Waveform& w, const FrontendConfig& config) {
    const Waveform at_rate = resample(w, config.sample_rate);
    const MatrixXcd x = stft(at_rate, config.win_ms, config.hop_ms, config.fft_size);
    const MelFilterbank fb =
        build_mel_filterbank(config.n_mels, config.fft_size, config.sample_rate, config.f_low, config.f_high);
    return log_standardize(mel_energies(x, fb));
}

void save_spectrogram(const Spectrogram& spec, const FrontendConfig& config,
                      const std::filesystem::path& stem) {
    auto csv = stem;
    csv += ".csv";
    auto sidecar = stem;
    sidecar += ".json";
    write_matrix_csv(csv, spec.values);
    nlohmann::json j = {
        {"sample_rate", config.sample_rate},
        {"n_mels", config.n_mels},
        {"n_frames", spec.n_frames()},
        {"win_ms", config.win_ms},
        {"hop_ms", config.hop_ms},
        {"win_length", config.win_length()},
        {"hop_length", config.hop_length()},
        {"fft_size", config.fft_size},
        {"f_low", config.f_low},
        {"f_high", config.f_high},
        {"window", "hann_periodic"},
        {"mel_scale", "htk"},
        {"epsilon", kEpsilon},
    };
    write_json(sidecar, j);
}

}  // namespace qpatch
