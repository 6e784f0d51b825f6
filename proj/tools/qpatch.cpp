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

// qpatch: synthetic-spoof experiment driver.
//
// Exit codes: 0 success, 1 internal error, 2 bad input or configuration.

#include <chrono>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qpatch/csv_io.hpp"
#include "qpatch/pipeline.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> work_dir;
    std::optional<std::string> input_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> synthetic_audio;
    std::optional<int> n_bonafide;
    std::optional<double> snr_db;
    std::optional<int> k;
    std::optional<int> patch_size;
    std::optional<int> depth;
    std::optional<std::string> s3_axis;
    std::optional<double> C;
    std::optional<double> gamma;
    std::string kind = "quantum";
    bool quiet = false;
};

qpatch::ExperimentConfig resolve(const Overrides& o) {
    qpatch::ExperimentConfig cfg;
    if (!o.config.empty()) cfg = qpatch::load_config(o.config);
    if (o.work_dir) cfg.work_dir = *o.work_dir;
    if (o.input_dir) cfg.input_dir = *o.input_dir;
    if (o.seed) cfg.seed = *o.seed;
    if (o.synthetic_audio) cfg.synthetic_audio = *o.synthetic_audio;
    if (o.n_bonafide) cfg.counts.n_bonafide = *o.n_bonafide;
    if (o.snr_db) cfg.spoof.snr_db = *o.snr_db;
    if (o.k) cfg.patch.top_k = *o.k;
    if (o.patch_size) cfg.patch.size = *o.patch_size;
    if (o.depth) cfg.embedding.depth = *o.depth;
    if (o.s3_axis) cfg.embedding.s3_axis = qpatch::parse_axis(*o.s3_axis);
    if (o.C) cfg.svm_C = *o.C;
    if (o.gamma) cfg.gamma = *o.gamma;
    cfg.validate();
    return cfg;
}

void print_summary(const qpatch::EvaluationResult& r) {
    std::printf("%-8s AUROC %.4f  EER %.4f  (threshold %s)\n", r.kernel_kind.c_str(), r.auroc, r.eer.eer,
                qpatch::format_double(r.eer.threshold).c_str());
    if (r.structure_all) {
        const auto& s = *r.structure_all;
        std::printf("         mean K: bonafide-bonafide %.4f, spoof-spoof %.4f, bonafide-spoof %.4f\n",
                    s.bonafide_different.mean, s.spoof_different.mean, s.cross_class.mean);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qpatch: patch-level quantum-kernel anti-spoofing experiments"};
    app.require_subcommand(1);
    Overrides o;

    app.add_option("--config", o.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    app.add_option("--work-dir", o.work_dir, "Directory for all stage outputs");
    app.add_option("--seed", o.seed, "Master seed");
    app.add_option("--depth", o.depth, "Embedding circuit depth (1-3)");
    app.add_option("--s3-axis", o.s3_axis, "Rotation axis for the bandwidth angle (X, Y or Z)");
    app.add_flag("--quiet,-q", o.quiet, "Suppress progress messages");

    auto* synth = app.add_subcommand("synth", "Build bona fide / spoof dataset and manifest");
    synth->add_option("--input-dir", o.input_dir, "Directory of bona fide WAV files");
    synth->add_option("--synthetic-audio", o.synthetic_audio, "Generate N synthetic bona fide clips instead");
    synth->add_option("--n-bonafide", o.n_bonafide, "Number of bona fide files to use");
    synth->add_option("--snr-db", o.snr_db, "Additive noise SNR in dB (inf disables)");

    auto* features = app.add_subcommand("features", "Extract patch feature vectors");
    features->add_option("--k", o.k, "Number of selected patches");
    features->add_option("--patch-size", o.patch_size, "Patch edge length");

    auto* kernel = app.add_subcommand("kernel", "Compute train and dev-vs-train Gram matrices");
    kernel->add_option("--kind", o.kind, "quantum or rbf")->check(CLI::IsMember({"quantum", "rbf"}));
    kernel->add_option("--gamma", o.gamma, "RBF gamma (default: scale heuristic)");

    auto* train_eval = app.add_subcommand("train-eval", "Train the SVM and score the dev split");
    train_eval->add_option("--kind", o.kind, "quantum or rbf")->check(CLI::IsMember({"quantum", "rbf"}));
    train_eval->add_option("--C", o.C, "Soft-margin penalty");
    train_eval->add_option("--gamma", o.gamma, "RBF gamma (default: scale heuristic)");

    auto* run_all = app.add_subcommand("run-all", "All stages for both kernels");
    run_all->add_option("--input-dir", o.input_dir, "Directory of bona fide WAV files");
    run_all->add_option("--synthetic-audio", o.synthetic_audio, "Generate N synthetic bona fide clips instead");
    run_all->add_option("--n-bonafide", o.n_bonafide, "Number of bona fide files to use");
    run_all->add_option("--snr-db", o.snr_db, "Additive noise SNR in dB (inf disables)");
    run_all->add_option("--k", o.k, "Number of selected patches");
    run_all->add_option("--C", o.C, "Soft-margin penalty");

    for (auto* sub : {synth, features, kernel, train_eval, run_all}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    qpatch::set_quiet(o.quiet);
    try {
        const qpatch::ExperimentConfig cfg = resolve(o);
        const auto t0 = std::chrono::steady_clock::now();
        int status = 0;
        if (*synth) {
            const auto m = qpatch::cmd_synth(cfg);
            std::printf("manifest: %zu entries\n", m.entries.size());
        } else if (*features) {
            const auto r = qpatch::cmd_features(cfg);
            std::printf("features: %zu rows, %zu skipped\n", r.rows.size(), r.skipped.size());
            if (!r.skipped.empty()) status = 2;
        } else if (*kernel) {
            const auto r = qpatch::cmd_kernel(cfg, qpatch::parse_kernel_kind(o.kind));
            std::printf("%s kernel: train %ldx%ld, cross %ldx%ld\n", o.kind.c_str(),
                        static_cast<long>(r.train.values.rows()), static_cast<long>(r.train.values.cols()),
                        static_cast<long>(r.cross.rows()), static_cast<long>(r.cross.cols()));
        } else if (*train_eval) {
            print_summary(qpatch::cmd_train_eval(cfg, qpatch::parse_kernel_kind(o.kind)));
        } else if (*run_all) {
            const auto r = qpatch::cmd_run_all(cfg);
            print_summary(r.quantum);
            print_summary(r.rbf);
            if (r.skipped > 0) status = 2;
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        qpatch::log_info("done in " + qpatch::format_double(secs) + " s");
        return status;
    } catch (const qpatch::InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}
