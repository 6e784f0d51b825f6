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

#include "qpatch/spoof_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qpatch/csv_io.hpp"
#include "qpatch/wav_io.hpp"

namespace qpatch {

namespace fs = std::filesystem;

void validate(const SpoofConfig& config) {
    if (std::isnan(config.snr_db) || config.snr_db == -HUGE_VAL) throw InputError("snr_db must be finite or +inf");
    if (!(config.tilt_min > -1.0 && config.tilt_max < 1.0 && config.tilt_min <= config.tilt_max)) {
        throw InputError("tilt range must satisfy -1 < tilt_min <= tilt_max < 1");
    }
}

double rms(const VectorXd& x) { return x.size() == 0 ? 0.0 : std::sqrt(x.squaredNorm() / x.size()); }

NoiseResult add_noise(const Waveform& w, double snr_db, Rng& rng) {
    validate(w);
    NoiseResult r;
    r.audio = w;
    if (snr_db == HUGE_VAL) return r;
    if (!std::isfinite(snr_db)) throw InputError("snr_db must be finite or +inf");
    const double p_signal = w.samples.squaredNorm() / w.samples.size();
    if (p_signal <= 0.0) throw InputError("cannot set an SNR against a zero-power signal");

    VectorXd g(w.samples.size());
    for (Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
    const double p_g = g.squaredNorm() / g.size();
    const double p_target = p_signal / std::pow(10.0, snr_db / 10.0);
    g *= std::sqrt(p_target / p_g);

    r.audio.samples = w.samples + g;
    Index clipped = 0;
    for (Index i = 0; i < r.audio.samples.size(); ++i) {
        double& s = r.audio.samples[i];
        if (s > 1.0 || s < -1.0) {
            s = std::clamp(s, -1.0, 1.0);
            ++clipped;
        }
    }
    r.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(r.audio.samples.size());
    return r;
}

Waveform spectral_distort(const Waveform& w, double tilt) {
    validate(w);
    if (!(std::abs(tilt) < 1.0)) throw InputError("spectral tilt must satisfy |tilt| < 1");
    Waveform out = w;
    const VectorXd& x = w.samples;
    for (Index n = 1; n < x.size(); ++n) out.samples[n] = x[n] - tilt * x[n - 1];
    const double out_rms = rms(out.samples);
    if (out_rms < 1e-6) {
        log_warning("spectral tilt output RMS below 1e-6; skipping RMS renormalization");
        return out;
    }
    out.samples *= rms(x) / out_rms;
    return out;
}

Waveform synthesize_utterance(std::uint64_t seed, double seconds, int sample_rate) {
    if (!(seconds > 0.0) || sample_rate <= 0) throw InputError("synthetic utterance needs positive duration and rate");
    Rng rng(seed);
    const auto n = static_cast<Index>(std::lround(seconds * sample_rate));
    const double sr = sample_rate;
    const double nyquist_guard = 0.45 * sr;

    const double f0 = rng.uniform(90.0, 220.0);
    const double vib_rate = rng.uniform(4.0, 7.0);
    const double vib_depth = rng.uniform(0.01, 0.04);
    const double rolloff = rng.uniform(0.8, 1.6);
    const double f0_drift = rng.uniform(-0.15, 0.15);  // relative change across the utterance

    // Syllables: voiced (or noisy) segments separated by short pauses.
    struct Segment {
        double start, end;
        bool fricative;
        std::vector<double> harmonic_gain;  // formant-shaped, fixed per segment
    };
    constexpr int kMaxHarmonics = 60;
    std::vector<Segment> segments;
    double t = rng.uniform(0.05, 0.15);
    while (t < seconds - 0.1) {
        Segment s;
        s.start = t;
        s.end = std::min(seconds - 0.03, t + rng.uniform(0.12, 0.3));
        const double formants[3] = {rng.uniform(300.0, 850.0), rng.uniform(900.0, 2300.0),
                                    rng.uniform(2400.0, 3400.0)};
        s.fricative = rng.uniform() < 0.25;
        const double f_mid = f0 * (1.0 + f0_drift * 0.5 * (s.start + s.end) / seconds);
        for (int h = 1; h <= kMaxHarmonics; ++h) {
            double gain = 0.05;
            for (double fm : formants) {
                const double d = (h * f_mid - fm) / (0.12 * fm);
                gain += std::exp(-0.5 * d * d);
            }
            s.harmonic_gain.push_back(gain * std::pow(static_cast<double>(h), -rolloff));
        }
        segments.push_back(std::move(s));
        t = segments.back().end + rng.uniform(0.04, 0.14);
    }

    Waveform w;
    w.sample_rate = sample_rate;
    w.samples = VectorXd::Zero(n);
    double phase = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double time = static_cast<double>(i) / sr;
        const double f = f0 * (1.0 + f0_drift * time / seconds) *
                         (1.0 + vib_depth * std::sin(2.0 * std::numbers::pi * vib_rate * time));
        phase += 2.0 * std::numbers::pi * f / sr;
        for (const Segment& s : segments) {
            if (time < s.start || time >= s.end) continue;
            const double u = (time - s.start) / (s.end - s.start);
            const double env = std::pow(std::sin(std::numbers::pi * u), 1.5);
            double v = 0.0;
            if (s.fricative) {
                v = 0.15 * rng.normal();
            } else {
                for (int h = 1; h * f < nyquist_guard && h <= kMaxHarmonics; ++h) {
                    v += s.harmonic_gain[static_cast<std::size_t>(h - 1)] * std::sin(h * phase);
                }
            }
            w.samples[i] += env * v;
        }
    }
    // room-noise floor
    for (Index i = 0; i < n; ++i) w.samples[i] += 1e-4 * rng.normal();
    const double peak = w.samples.cwiseAbs().maxCoeff();
    if (peak > 0.0) w.samples *= rng.uniform(0.3, 0.7) / peak;
    return w;
}

std::string to_string(Label label) { return label == Label::Bonafide ? "bonafide" : "spoof"; }
std::string to_string(Split split) { return split == Split::Train ? "train" : "dev"; }

Label parse_label(const std::string& s) {
    if (s == "bonafide") return Label::Bonafide;
    if (s == "spoof") return Label::Spoof;
    throw InputError("unknown label '" + s + "'");
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "dev") return Split::Dev;
    throw InputError("unknown split '" + s + "'");
}

int DatasetCounts::train_per_class() const {
    return static_cast<int>(std::lround(n_bonafide * train_fraction));
}

namespace {

std::string manifest_path(const fs::path& file, const fs::path& base) {
    const fs::path abs_file = fs::weakly_canonical(fs::absolute(file));
    const fs::path abs_base = fs::weakly_canonical(fs::absolute(base));
    const fs::path rel = abs_file.lexically_relative(abs_base);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return abs_file.generic_string();
}

}  // namespace

DatasetManifest build_dataset(const fs::path& bonafide_dir, const SpoofConfig& config, const DatasetCounts& counts,
                              const fs::path& out_dir) {
    validate(config);
    if (counts.n_bonafide < 1) throw InputError("dataset needs at least one bona fide file");
    if (!(counts.train_fraction > 0.0 && counts.train_fraction < 1.0)) {
        throw InputError("train_fraction must be in (0, 1)");
    }
    if (!fs::is_directory(bonafide_dir)) throw InputError("bona fide directory not found: " + bonafide_dir.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(bonafide_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    if (static_cast<int>(files.size()) < counts.n_bonafide) {
        throw InputError("need " + std::to_string(counts.n_bonafide) + " bona fide WAV files in " +
                         bonafide_dir.string() + ", found " + std::to_string(files.size()) + " (short by " +
                         std::to_string(counts.n_bonafide - static_cast<int>(files.size())) + ")");
    }
    files.resize(static_cast<std::size_t>(counts.n_bonafide));

    const std::size_t n = files.size();
    std::vector<std::string> stems(n);
    for (std::size_t i = 0; i < n; ++i) stems[i] = files[i].stem().string();

    const fs::path spoof_dir = out_dir / "spoof";
    fs::create_directories(spoof_dir);
    std::vector<fs::path> spoof_paths(n);
    parallel_for(n, [&](std::size_t i) {
        Rng rng(derive_seed(config.seed, "spoof", stems[i]));
        const double tilt = rng.uniform(config.tilt_min, config.tilt_max);
        const Waveform bona = resample(read_wav(files[i]));
        const NoiseResult noisy = add_noise(bona, config.snr_db, rng);
        if (noisy.clipped_fraction > 0.0) {
            log_warning(stems[i] + ": clipped " + format_double(100.0 * noisy.clipped_fraction) + "% of samples");
        }
        spoof_paths[i] = spoof_dir / (stems[i] + "_spoof.wav");
        write_wav(spoof_paths[i], spectral_distort(noisy.audio, tilt));
    });

    const auto n_train = static_cast<std::size_t>(counts.train_per_class());
    const auto assign = [&](const char* stream) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(config.seed, "split", stream));
        rng.shuffle(order);
        std::vector<Split> split(n, Split::Dev);
        for (std::size_t r = 0; r < n_train && r < n; ++r) split[order[r]] = Split::Train;
        return split;
    };
    const auto bona_split = assign("bonafide");
    const auto spoof_split = assign("spoof");

    DatasetManifest m;
    m.seed = config.seed;
    for (std::size_t i = 0; i < n; ++i) {
        m.entries.push_back({"bonafide_" + stems[i], manifest_path(files[i], out_dir), Label::Bonafide,
                             bona_split[i], stems[i]});
    }
    for (std::size_t i = 0; i < n; ++i) {
        m.entries.push_back({"spoof_" + stems[i], manifest_path(spoof_paths[i], out_dir), Label::Spoof,
                             spoof_split[i], stems[i]});
    }
    write_manifest(out_dir / "manifest.csv", m);
    return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
    CsvTable t;
    t.header = {"id", "path", "label", "split", "source_id"};
    for (const auto& e : m.entries) t.rows.push_back({e.id, e.path, to_string(e.label), to_string(e.split), e.source_id});
    write_csv(path, t);
}

DatasetManifest read_manifest(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_id = t.column("id"), c_path = t.column("path"), c_label = t.column("label"),
                      c_split = t.column("split"), c_src = t.column("source_id");
    DatasetManifest m;
    for (const auto& row : t.rows) {
        m.entries.push_back({row[c_id], row[c_path], parse_label(row[c_label]), parse_split(row[c_split]), row[c_src]});
    }
    return m;
}

}  // namespace qpatch
