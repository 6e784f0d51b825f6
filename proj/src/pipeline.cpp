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

#include "qpatch/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "qpatch/csv_io.hpp"
#include "qpatch/wav_io.hpp"

namespace qpatch {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config

namespace {

nlohmann::json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double read_number_or_inf(const nlohmann::json& j) {
    if (j.is_string()) return parse_double(j.get<std::string>(), "config");
    return j.get<double>();
}

template <typename T>
void overlay(const nlohmann::json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json svm = {{"C", svm_C}};
    svm["gamma"] = gamma ? nlohmann::json(*gamma) : nlohmann::json("scale");
    return {
        {"input_dir", input_dir.generic_string()},
        {"work_dir", work_dir.generic_string()},
        {"synthetic_audio", synthetic_audio},
        {"synthetic_seconds", synthetic_seconds},
        {"seed", seed},
        {"frontend",
         {{"sample_rate", frontend.sample_rate},
          {"win_ms", frontend.win_ms},
          {"hop_ms", frontend.hop_ms},
          {"fft_size", frontend.fft_size},
          {"n_mels", frontend.n_mels},
          {"f_low", frontend.f_low},
          {"f_high", frontend.f_high}}},
        {"patch", {{"size", patch.size}, {"k", patch.top_k}}},
        {"circuit", {{"depth", embedding.depth}, {"s3_axis", std::string(1, axis_name(embedding.s3_axis))}}},
        {"spoof", {{"snr_db", number_or_inf(spoof.snr_db)}, {"tilt_min", spoof.tilt_min}, {"tilt_max", spoof.tilt_max}}},
        {"dataset", {{"n_bonafide", counts.n_bonafide}, {"train_fraction", counts.train_fraction}}},
        {"svm", svm},
    };
}

void ExperimentConfig::merge_json(const nlohmann::json& j) {
    try {
        if (j.contains("input_dir")) input_dir = j.at("input_dir").get<std::string>();
        if (j.contains("work_dir")) work_dir = j.at("work_dir").get<std::string>();
        overlay(j, "synthetic_audio", synthetic_audio);
        overlay(j, "synthetic_seconds", synthetic_seconds);
        overlay(j, "seed", seed);
        if (j.contains("frontend")) {
            const auto& f = j.at("frontend");
            overlay(f, "sample_rate", frontend.sample_rate);
            overlay(f, "win_ms", frontend.win_ms);
            overlay(f, "hop_ms", frontend.hop_ms);
            overlay(f, "fft_size", frontend.fft_size);
            overlay(f, "n_mels", frontend.n_mels);
            overlay(f, "f_low", frontend.f_low);
            overlay(f, "f_high", frontend.f_high);
        }
        if (j.contains("patch")) {
            overlay(j.at("patch"), "size", patch.size);
            overlay(j.at("patch"), "k", patch.top_k);
        }
        if (j.contains("circuit")) {
            overlay(j.at("circuit"), "depth", embedding.depth);
            if (j.at("circuit").contains("s3_axis")) {
                embedding.s3_axis = parse_axis(j.at("circuit").at("s3_axis").get<std::string>());
            }
        }
        if (j.contains("spoof")) {
            const auto& s = j.at("spoof");
            if (s.contains("snr_db")) spoof.snr_db = read_number_or_inf(s.at("snr_db"));
            overlay(s, "tilt_min", spoof.tilt_min);
            overlay(s, "tilt_max", spoof.tilt_max);
        }
        if (j.contains("dataset")) {
            overlay(j.at("dataset"), "n_bonafide", counts.n_bonafide);
            overlay(j.at("dataset"), "train_fraction", counts.train_fraction);
        }
        if (j.contains("svm")) {
            overlay(j.at("svm"), "C", svm_C);
            if (j.at("svm").contains("gamma")) {
                const auto& g = j.at("svm").at("gamma");
                if (g.is_string() && g.get<std::string>() == "scale") gamma.reset();
                else gamma = g.get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid config value: ") + e.what());
    }
}

void ExperimentConfig::validate() const {
    if (work_dir.empty()) throw InputError("work_dir must be set");
    if (synthetic_audio < 0) throw InputError("synthetic_audio must be >= 0");
    if (!(synthetic_seconds > 0.05)) throw InputError("synthetic_seconds must exceed 0.05");
    if (frontend.sample_rate != kTargetSampleRate) {
        log_warning("front-end sample rate differs from 16 kHz");
    }
    if (frontend.fft_size < frontend.win_length()) throw InputError("fft_size must cover the analysis window");
    if (frontend.hop_length() < 1) throw InputError("hop must be at least one sample");
    if (patch.size < 2) throw InputError("patch size must be at least 2");
    if (patch.top_k < 1) throw InputError("k must be at least 1");
    if (frontend.n_mels < patch.size) throw InputError("n_mels must be at least the patch size");
    qpatch::validate(embedding);
    qpatch::validate(spoof_config());
    if (!(svm_C > 0.0)) throw InputError("svm C must be positive");
    if (gamma && !(*gamma >= 0.0)) throw InputError("rbf gamma must be non-negative");
}

SpoofConfig ExperimentConfig::spoof_config() const {
    SpoofConfig s = spoof;
    s.seed = seed;
    return s;
}

ExperimentConfig load_config(const fs::path& path) {
    ExperimentConfig cfg;
    cfg.merge_json(read_json(path));
    return cfg;
}

// ---------------------------------------------------------------------------
// Feature table

void write_features(const fs::path& path, const std::vector<FeatureRecord>& rows) {
    CsvTable t;
    const Index dim = rows.empty() ? 0 : rows.front().values.size();
    t.header = {"id", "label"};
    for (Index i = 0; i < dim; ++i) t.header.push_back("x" + std::to_string(i));
    for (const auto& r : rows) {
        std::vector<std::string> cells = {r.id, to_string(r.label)};
        for (Index i = 0; i < r.values.size(); ++i) cells.push_back(format_double(r.values[i]));
        t.rows.push_back(std::move(cells));
    }
    write_csv(path, t);
}

void write_patch_locations(const fs::path& path, const std::vector<FeatureRecord>& rows) {
    CsvTable t;
    t.header = {"id", "rank", "patch_index", "time_index", "freq_index"};
    for (const auto& r : rows) {
        for (std::size_t p = 0; p < r.patches.size(); ++p) {
            const PatchLocation& loc = r.patches[p];
            t.rows.push_back({r.id, std::to_string(p + 1), std::to_string(loc.index), std::to_string(loc.time_index),
                              std::to_string(loc.freq_index)});
        }
    }
    write_csv(path, t);
}

std::vector<FeatureRecord> read_features(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_id = t.column("id"), c_label = t.column("label");
    std::vector<std::size_t> xs;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (t.header[c].size() > 1 && t.header[c][0] == 'x') xs.push_back(c);
    }
    if (xs.empty()) throw InputError("features file has no feature columns: " + path.string());
    std::vector<FeatureRecord> rows;
    for (const auto& row : t.rows) {
        FeatureRecord r;
        r.id = row[c_id];
        r.label = parse_label(row[c_label]);
        r.values.resize(static_cast<Index>(xs.size()));
        for (std::size_t i = 0; i < xs.size(); ++i) r.values[static_cast<Index>(i)] = parse_double(row[xs[i]], path.string());
        rows.push_back(std::move(r));
    }
    return rows;
}

FeatureVector features_from_waveform(const Waveform& w, const ExperimentConfig& cfg) {
    return extract_features(compute_spectrogram(w, cfg.frontend), cfg.patch);
}

// ---------------------------------------------------------------------------
// Stages

namespace {

fs::path manifest_file(const ExperimentConfig& cfg) { return cfg.work_dir / "manifest.csv"; }
fs::path features_file(const ExperimentConfig& cfg) { return cfg.work_dir / "features.csv"; }
fs::path kernel_stem(const ExperimentConfig& cfg, KernelKind kind, const char* part) {
    return cfg.work_dir / ("kernel_" + to_string(kind) + "_" + part);
}

DatasetManifest require_manifest(const ExperimentConfig& cfg) {
    if (!fs::exists(manifest_file(cfg))) {
        throw InputError("manifest not found at " + manifest_file(cfg).string() + "; run `synth` first");
    }
    return read_manifest(manifest_file(cfg));
}

std::vector<FeatureRecord> require_features(const ExperimentConfig& cfg) {
    if (!fs::exists(features_file(cfg))) {
        throw InputError("features not found at " + features_file(cfg).string() + "; run `features` first");
    }
    return read_features(features_file(cfg));
}

struct SplitView {
    std::vector<std::string> ids;
    std::vector<VectorXd> x;
    std::vector<int> labels01;  // 1 bona fide, 0 spoof
};

// Manifest order, restricted to rows that have features.
std::pair<SplitView, SplitView> split_features(const DatasetManifest& m, const std::vector<FeatureRecord>& rows) {
    std::map<std::string, const FeatureRecord*> by_id;
    for (const auto& r : rows) by_id[r.id] = &r;
    SplitView train, dev;
    for (const auto& e : m.entries) {
        const auto it = by_id.find(e.id);
        if (it == by_id.end()) continue;
        SplitView& v = e.split == Split::Train ? train : dev;
        v.ids.push_back(e.id);
        v.x.push_back(it->second->values);
        v.labels01.push_back(e.label == Label::Bonafide ? 1 : 0);
    }
    if (train.ids.empty() || dev.ids.empty()) throw InputError("train or dev split has no feature rows");
    return {std::move(train), std::move(dev)};
}

KernelSpec kernel_spec_for(const ExperimentConfig& cfg, KernelKind kind, const std::vector<VectorXd>& train) {
    KernelSpec spec;
    spec.kind = kind;
    spec.embedding = cfg.embedding;
    spec.gamma = cfg.gamma ? *cfg.gamma : rbf_gamma_scale(train);
    return spec;
}

}  // namespace

DatasetManifest cmd_synth(const ExperimentConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.work_dir);
    fs::path source = cfg.input_dir;
    DatasetCounts counts = cfg.counts;
    if (cfg.synthetic_audio > 0) {
        source = cfg.work_dir / "bonafide";
        fs::create_directories(source);
        counts.n_bonafide = cfg.synthetic_audio;
        const auto n = static_cast<std::size_t>(cfg.synthetic_audio);
        parallel_for(n, [&](std::size_t i) {
            char name[32];
            std::snprintf(name, sizeof name, "utt_%04zu.wav", i);
            const Waveform w = synthesize_utterance(derive_seed(cfg.seed, "synthetic", std::to_string(i)),
                                                    cfg.synthetic_seconds);
            write_wav(source / name, w);
        });
        log_info("wrote " + std::to_string(n) + " synthetic bona fide clips to " + source.string());
    } else if (source.empty()) {
        throw InputError("no input: pass --input-dir or --synthetic-audio N");
    } else if (!fs::is_directory(source)) {
        throw InputError("input directory not found: " + source.string());
    }
    DatasetManifest m = build_dataset(source, cfg.spoof_config(), counts, cfg.work_dir);
    log_info("manifest: " + std::to_string(m.entries.size()) + " entries, " + manifest_file(cfg).string());
    return m;
}

FeaturesResult cmd_features(const ExperimentConfig& cfg) {
    cfg.validate();
    const DatasetManifest m = require_manifest(cfg);
    std::vector<std::optional<FeatureRecord>> slots(m.entries.size());
    std::vector<std::string> errors(m.entries.size());
    parallel_for(m.entries.size(), [&](std::size_t i) {
        const ManifestEntry& e = m.entries[i];
        const fs::path p = fs::path(e.path).is_absolute() ? fs::path(e.path) : cfg.work_dir / e.path;
        try {
            const FeatureVector x = features_from_waveform(read_wav(p), cfg);
            slots[i] = FeatureRecord{e.id, e.label, x.values, x.patch_order};
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    });
    FeaturesResult out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) {
            out.rows.push_back(std::move(*slots[i]));
        } else {
            log_warning("skipping " + m.entries[i].id + ": " + errors[i]);
            out.skipped.push_back(m.entries[i].id);
        }
    }
    write_features(features_file(cfg), out.rows);
    write_patch_locations(cfg.work_dir / "patches.csv", out.rows);
    log_info("features: " + std::to_string(out.rows.size()) + " rows, " + std::to_string(out.skipped.size()) +
             " skipped");
    return out;
}

KernelResult cmd_kernel(const ExperimentConfig& cfg, KernelKind kind) {
    cfg.validate();
    const DatasetManifest m = require_manifest(cfg);
    const auto rows = require_features(cfg);
    auto [train, dev] = split_features(m, rows);

    KernelResult r;
    r.spec = kernel_spec_for(cfg, kind, train.x);
    r.train = build_gram(train.x, r.spec);
    r.cross = build_cross_kernel(dev.x, train.x, r.spec);
    r.train_ids = train.ids;
    r.dev_ids = dev.ids;

    save_gram(r.train, r.spec, kernel_stem(cfg, kind, "train"),
              {{"row_ids", train.ids}, {"col_ids", train.ids}});
    GramMatrix cross{r.cross, kind, r.train.config_hash};
    save_gram(cross, r.spec, kernel_stem(cfg, kind, "cross"), {{"row_ids", dev.ids}, {"col_ids", train.ids}});
    log_info(to_string(kind) + " kernel: " + std::to_string(r.train.values.rows()) + "x" +
             std::to_string(r.train.values.cols()) + " train, " + std::to_string(r.cross.rows()) + "x" +
             std::to_string(r.cross.cols()) + " cross");
    return r;
}

EvaluationResult cmd_train_eval(const ExperimentConfig& cfg, KernelKind kind) {
    cfg.validate();
    const DatasetManifest m = require_manifest(cfg);
    const auto rows = require_features(cfg);
    auto [train, dev] = split_features(m, rows);

    const fs::path train_stem = kernel_stem(cfg, kind, "train");
    const fs::path cross_stem = kernel_stem(cfg, kind, "cross");
    auto train_json = train_stem;
    train_json += ".json";
    if (!fs::exists(train_json)) {
        throw InputError("kernel not found at " + train_stem.string() + ".csv; run `kernel --kind " +
                         to_string(kind) + "` first");
    }
    const GramMatrix K = load_gram(train_stem);
    const GramMatrix cross = load_gram(cross_stem);
    auto cross_json = cross_stem;
    cross_json += ".json";
    const auto train_ids = read_json(train_json).at("row_ids").get<std::vector<std::string>>();
    const auto dev_ids = read_json(cross_json).at("row_ids").get<std::vector<std::string>>();
    if (train_ids != train.ids || dev_ids != dev.ids) {
        throw InputError("kernel files are stale relative to manifest/features; rerun `kernel`");
    }
    check_gram(K.values);
    if (cross.values.rows() != static_cast<Index>(dev.ids.size()) ||
        cross.values.cols() != static_cast<Index>(train.ids.size())) {
        throw InputError("cross kernel shape does not match the dev/train split");
    }

    std::vector<int> y_train(train.labels01.size());
    for (std::size_t i = 0; i < y_train.size(); ++i) y_train[i] = train.labels01[i] == 1 ? 1 : -1;
    SvmModel model = train_svm(K, y_train, cfg.svm_C);
    const KernelSpec spec = kernel_spec_for(cfg, kind, train.x);
    model.kernel = spec.to_json();
    model.feature_snapshot = features_file(cfg).generic_string();
    write_json(cfg.work_dir / ("model_" + to_string(kind) + ".json"), model.to_json());

    const VectorXd scores = decision_scores(model, cross.values);
    std::vector<double> s(scores.data(), scores.data() + scores.size());
    CsvTable score_table;
    score_table.header = {"id", "label", "score"};
    for (std::size_t i = 0; i < s.size(); ++i) {
        score_table.rows.push_back({dev.ids[i], dev.labels01[i] ? "bonafide" : "spoof", format_double(s[i])});
    }
    write_csv(cfg.work_dir / ("scores_" + to_string(kind) + ".csv"), score_table);

    EvaluationResult r;
    r.kernel_kind = to_string(kind);
    r.auroc = auroc(s, dev.labels01);
    r.roc = roc_curve(s, dev.labels01);
    r.eer = eer(r.roc);

    // Similarity structure on the dev split and on all samples.
    const auto structure_of = [&](const std::vector<VectorXd>& x, const std::vector<int>& labels) {
        const MatrixXd G = build_gram(x, spec).values;
        std::vector<MatrixXd> slots;
        const Index n_slots = x.front().size() / kSummaryDim;
        for (Index slot = 0; slot < n_slots; ++slot) slots.push_back(build_patch_slot_gram(x, slot, spec));
        return kernel_structure(G, labels, slots);
    };
    r.structure_dev = structure_of(dev.x, dev.labels01);
    std::vector<VectorXd> all_x = train.x;
    all_x.insert(all_x.end(), dev.x.begin(), dev.x.end());
    std::vector<int> all_y = train.labels01;
    all_y.insert(all_y.end(), dev.labels01.begin(), dev.labels01.end());
    r.structure_all = structure_of(all_x, all_y);

    r.extra = {{"n_train", train.ids.size()},
               {"n_dev", dev.ids.size()},
               {"n_support", model.support_indices.size()},
               {"bias", model.bias},
               {"C", model.C},
               {"smo_iterations", model.iterations},
               {"kkt_violation", model.kkt_violation},
               {"kernel", spec.to_json()},
               {"train_gram_hash", K.config_hash}};
    r.config = cfg.to_json();
    write_report(r, cfg.work_dir / ("report_" + to_string(kind)));
    log_info(to_string(kind) + ": dev AUROC " + format_double(r.auroc) + ", EER " + format_double(r.eer.eer));
    return r;
}

RunAllResult cmd_run_all(const ExperimentConfig& cfg) {
    RunAllResult out;
    cmd_synth(cfg);
    out.skipped = cmd_features(cfg).skipped.size();
    for (KernelKind kind : {KernelKind::Quantum, KernelKind::Rbf}) cmd_kernel(cfg, kind);
    out.quantum = cmd_train_eval(cfg, KernelKind::Quantum);
    out.rbf = cmd_train_eval(cfg, KernelKind::Rbf);
    return out;
}

}  // namespace qpatch
