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

// Acceptance gate: runs the nine release criteria and prints one PASS/FAIL
// line per criterion. Exit status is nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>

#include "oracles.hpp"
#include "qpatch/csv_io.hpp"
#include "qpatch/pipeline.hpp"

using namespace qpatch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + std::string(QPATCH_CLI_PATH) + " --quiet " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<double> summary_angles(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }

Eigen::Vector4d random_summary(Rng& rng) {
    return {rng.uniform(-3, 3), rng.uniform(0, 3), rng.uniform(0, 1.5), rng.uniform(-1, 1)};
}

// The default experiment: 50 synthetic bona fide clips, default everything else.
const char* kRunAll = "run-all --synthetic-audio 50";

const std::vector<std::string> kArtifacts = {
    "features.csv",           "kernel_quantum_train.csv", "kernel_quantum_cross.csv", "kernel_rbf_train.csv",
    "kernel_rbf_cross.csv",   "report_quantum.json",      "report_rbf.json",          "report_quantum_roc.csv",
    "report_rbf_roc.csv",     "scores_quantum.csv",       "scores_rbf.csv",           "manifest.csv",
};

struct RunAll {
    int exit_code = -1;
    double seconds = 0.0;
    std::map<std::string, std::string> digests;
};

RunAll run_all(const fs::path& work, const std::string& env = "") {
    fs::remove_all(work);
    RunAll r;
    const auto t0 = Clock::now();
    r.exit_code = run_cli("--work-dir " + work.string() + " " + kRunAll, env);
    r.seconds = seconds_since(t0);
    for (const auto& a : kArtifacts) {
        if (fs::exists(work / a)) r.digests[a] = file_digest(work / a);
    }
    return r;
}

// ---------------------------------------------------------------------------

Outcome self_fidelity() {
    const auto t0 = Clock::now();
    Rng rng(101);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        VectorXd x(8);
        x << random_summary(rng), random_summary(rng);
        worst = std::max(worst, std::abs(fidelity_kernel(x, x) - 1.0));
    }
    const double t = seconds_since(t0);
    return {worst < 1e-10 && t < 1.0, "max |k(x,x) - 1| = " + fmt(worst) + ", " + fmt(t) + " s"};
}

Outcome simulator_oracle() {
    const auto t0 = Clock::now();
    Rng rng(102);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Eigen::Vector4d s = random_summary(rng);
        const auto a = summary_angles(s);
        worst = std::max(worst, (embed_patch(s).amplitudes() - oracle::embedding_state(a, 1)).cwiseAbs().maxCoeff());
    }
    for (int i = 0; i < 50; ++i) {
        const Eigen::Vector4d s = random_summary(rng), u = random_summary(rng);
        std::vector<double> a = summary_angles(s);
        for (double v : summary_angles(u)) a.push_back(v);
        worst = std::max(worst, (embed_pair(s, u).amplitudes() - oracle::embedding_state(a, 1)).cwiseAbs().maxCoeff());
    }
    const double t = seconds_since(t0);
    return {worst < 1e-12 && t < 5.0, "max amplitude deviation = " + fmt(worst) + ", " + fmt(t) + " s"};
}

Outcome gram_properties(const fs::path& work) {
    const GramMatrix K = load_gram(work / "kernel_quantum_train");
    if (K.values.rows() != 80 || K.values.cols() != 80) {
        return {false, "train Gram is " + std::to_string(K.values.rows()) + "x" + std::to_string(K.values.cols())};
    }
    const double asym = (K.values - K.values.transpose()).cwiseAbs().maxCoeff();
    const double diag = (K.values.diagonal().array() - 1.0).abs().maxCoeff();
    const double lmin = min_eigenvalue(K.values);
    return {asym < 1e-10 && diag < 1e-10 && lmin >= -1e-8,
            "80x80: asymmetry " + fmt(asym) + ", diagonal error " + fmt(diag) + ", min eigenvalue " + fmt(lmin)};
}

Outcome s3_inert(const fs::path& work) {
    Rng rng(104);
    std::vector<VectorXd> x;
    for (const auto& r : read_features(work / "features.csv")) x.push_back(r.values);
    for (int i = 0; i < 50; ++i) x.push_back(oracle::random_vector(rng, 8));
    std::vector<VectorXd> perturbed = x;
    for (auto& v : perturbed) {
        for (Index i = 2; i < v.size(); i += kSummaryDim) v[i] += rng.uniform(-10, 10);
    }
    const KernelSpec spec;
    const MatrixXd a = build_gram(x, spec).values;
    const MatrixXd b = build_gram(perturbed, spec).values;
    const double worst = (a - b).cwiseAbs().maxCoeff();
    return {worst <= 1e-12, std::to_string(x.size()) + " vectors, max kernel change " + fmt(worst)};
}

Outcome metric_oracles() {
    Rng rng(105);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.below(11));
        std::vector<double> s;
        std::vector<int> y;
        for (std::size_t i = 0; i < n; ++i) {
            s.push_back(std::round(rng.uniform(0, 8)) / 4.0);
            y.push_back(static_cast<int>(rng.below(2)));
        }
        y[0] = 1;
        y[1] = 0;
        const EerResult e = eer(s, y);
        const oracle::Eer ref = oracle::eer(s, y);
        if (auroc(s, y) != oracle::auroc(s, y) || e.eer != ref.rate || e.threshold != ref.threshold) ++mismatches;
    }
    return {mismatches == 0, "200 sets, " + std::to_string(mismatches) + " mismatches"};
}

Outcome svm_correctness() {
    const MatrixXd K2 = MatrixXd::Identity(2, 2);
    const SvmModel two = train_svm(K2, std::vector<int>{1, -1}, 1.0);
    const double closed_err =
        std::max({std::abs(two.alpha[0] - 1.0), std::abs(two.alpha[1] - 1.0), std::abs(two.bias)});

    Rng rng(106);
    const SmoOptions opts;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(rng.below(37));
        std::vector<VectorXd> f;
        std::vector<int> y;
        for (int i = 0; i < n; ++i) {
            f.push_back(oracle::random_vector(rng, 8));
            y.push_back(i % 2 == 0 ? 1 : -1);
        }
        rng.shuffle(y);
        KernelSpec spec;
        if (trial % 2 == 1) {
            spec.kind = KernelKind::Rbf;
            spec.gamma = rng.uniform(0.01, 1.0);
        }
        const MatrixXd K = build_gram(f, spec).values;
        const double C = rng.uniform(0.1, 10.0);
        const SvmModel m = train_svm(K, y, C, opts);
        worst = std::max(worst, oracle::kkt_gap(K, y, m.alpha, C));
    }
    return {closed_err < 1e-9 && worst <= 1.5 * opts.tolerance,
            "two-point error " + fmt(closed_err) + ", max KKT residual " + fmt(worst) + " (limit " +
                fmt(1.5 * opts.tolerance) + ")"};
}

Outcome table_structure(const fs::path& work) {
    const auto j = read_json(work / "report_quantum.json").at("kernel_structure").at("all");
    const double bb = j.at("bonafide_bonafide_different").at("mean").get<double>();
    const double ss = j.at("spoof_spoof_different").at("mean").get<double>();
    const double bs = j.at("bonafide_spoof").at("mean").get<double>();
    return {bs < bb && bs < ss,
            "mean k: bonafide-bonafide " + fmt(bb) + ", spoof-spoof " + fmt(ss) + ", bonafide-spoof " + fmt(bs)};
}

Outcome end_to_end(const RunAll& r, const fs::path& work) {
    if (r.exit_code != 0) return {false, "run-all exited with " + std::to_string(r.exit_code)};
    const auto j = read_json(work / "report_quantum.json");
    const double a = j.at("auroc").get<double>();
    const std::size_t n_dev = j.at("model").at("n_dev").get<std::size_t>();
    return {a >= 0.75 && r.seconds < 60.0 && n_dev == 20,
            "quantum dev AUROC " + fmt(a) + " on " + std::to_string(n_dev) + " dev samples, run-all " +
                fmt(r.seconds) + " s"};
}

Outcome determinism(const RunAll& first, const fs::path& work) {
    const RunAll second = run_all(work, "QPATCH_THREADS=1");
    if (second.exit_code != 0) return {false, "second run exited with " + std::to_string(second.exit_code)};
    std::vector<std::string> differ;
    for (const auto& a : kArtifacts) {
        const auto it1 = first.digests.find(a), it2 = second.digests.find(a);
        if (it1 == first.digests.end() || it2 == second.digests.end() || it1->second != it2->second) differ.push_back(a);
    }
    std::string detail = std::to_string(kArtifacts.size() - differ.size()) + "/" + std::to_string(kArtifacts.size()) +
                         " artifacts byte-identical";
    for (const auto& d : differ) detail += "; differs: " + d;
    return {differ.empty(), detail};
}

}  // namespace

int main() {
    set_quiet(true);
    const fs::path work = fs::temp_directory_path() / ("qpatch_acceptance_" + std::to_string(::getpid()));

    std::printf("running default experiment (%s) ...\n", kRunAll);
    std::fflush(stdout);
    const RunAll first = run_all(work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"self-fidelity", self_fidelity},
        {"simulator vs dense Kronecker oracle", simulator_oracle},
        {"quantum Gram symmetric / unit-diagonal / PSD", [&] { return gram_properties(work); }},
        {"bandwidth angle inert under Z", [&] { return s3_inert(work); }},
        {"AUROC / EER vs brute-force oracles", metric_oracles},
        {"SVM closed form and KKT residuals", svm_correctness},
        {"cross-class similarity below within-class", [&] { return table_structure(work); }},
        {"end-to-end dev AUROC and runtime", [&] { return end_to_end(first, work); }},
        {"determinism across runs", [&] { return determinism(first, work); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s  criterion %zu: %s -- %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::error_code ec;
    fs::remove_all(work, ec);
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
