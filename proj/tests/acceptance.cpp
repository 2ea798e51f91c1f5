// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [work_dir]

#include "gafvit/attention.hpp"
#include "gafvit/autograd.hpp"
#include "gafvit/cli.hpp"
#include "gafvit/clustering.hpp"
#include "gafvit/gaf.hpp"
#include "gafvit/gradcheck.hpp"
#include "gafvit/metrics.hpp"
#include "gafvit/model.hpp"
#include "gafvit/synth.hpp"
#include "gafvit/vit.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

using namespace gafvit;
namespace ag = gafvit::autograd;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kGafTol = 1e-12;
constexpr double kGafSeconds = 10.0;
constexpr double kGradTolModel = 1e-3;
constexpr double kGradTolAttention = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kSoftmaxTol = 1e-9;
constexpr double kLayerNormTol = 1e-6;
constexpr double kAgreementMin = 0.95;
constexpr double kClusterSeconds = 30.0;
constexpr double kTestAccuracyMin = 0.90;
constexpr double kMacroF1Min = 0.85;
// Spearman rank correlation of val_loss against epoch over epochs 1..10.
constexpr double kTrendRhoMax = -0.8;
constexpr double kTrainSeconds = 1800.0;
constexpr std::size_t kTrainEpochs = 10;
constexpr std::size_t kAblationEpochs = 2;
constexpr std::uint64_t kSeed = 2024;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::vector<std::string>& args, const fs::path& log) {
    std::ofstream out(log, std::ios::app);
    std::ostringstream err;
    const int code = cli::dispatch(args, out, err);
    out << err.str();
    if (code != 0) std::cerr << "  gafvit " << args.front() << " exited " << code << ": " << err.str();
    return code;
}

Outcome gaf_invariants() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(kSeed);
    std::uniform_int_distribution<std::size_t> len(2, 128);
    std::normal_distribution<double> g(0.0, 3.0);
    double worst = 0.0;
    bool exact_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> x(len(rng));
        for (double& v : x) v = g(rng);
        if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) continue;
        const auto norm = gaf::normalize_series(x);
        const auto phi = gaf::to_polar(norm).angles;
        const auto pair = gaf::encode_feature(x);
        const std::size_t m = x.size();
        std::vector<double> diag(m);
        for (std::size_t j = 0; j < m; ++j) {
            diag[j] = pair.gasf(j, j);
            const double f = norm.values[j];
            worst = std::max(worst, std::abs(diag[j] - (2 * f * f - 1)));
            exact_ok &= pair.gadf(j, j) == 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double s = pair.gasf(j, k), d = pair.gadf(j, k);
                exact_ok &= s == pair.gasf(k, j) && d == -pair.gadf(k, j);
                exact_ok &= s >= -1.0 && s <= 1.0 && d >= -1.0 && d <= 1.0;
                worst = std::max(worst, std::abs(s - std::cos(phi[j] + phi[k])));
                worst = std::max(worst, std::abs(d - std::sin(phi[j] - phi[k])));
            }
        }
        const auto back = gaf::reconstruct_from_gasf(diag);
        for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, std::abs(back.values[j] - norm.values[j]));
    }
    const double secs = seconds_since(t0);
    return {exact_ok && worst <= kGafTol && secs < kGafSeconds,
            "max deviation " + fmt("%.2e", worst) + ", symmetry/range " + (exact_ok ? "exact" : "BROKEN") + ", " +
                fmt("%.2f s", secs)};
}

Outcome image_sizes() {
    gaf::FeatureMatrix f;
    f.feature_names = {"speed", "accel", "jerk"};
    f.values = Matrix(99, 3);
    std::mt19937_64 rng(kSeed);
    std::normal_distribution<double> g;
    for (double& v : f.values.data) v = g(rng);
    const auto img = gaf::encode_matrix(f);
    vit::VitConfig c;
    const Matrix strips = vit::patchify(img, c);
    c.patch_mode = vit::PatchMode::Square;
    const Matrix squares = vit::patchify(img, c);
    const bool ok = img.height == 99 && img.width == 99 && img.channels() == 6 && strips.rows == 11 &&
                    squares.rows == 121;
    return {ok, std::to_string(img.height) + "x" + std::to_string(img.width) + "x" + std::to_string(img.channels()) +
                    ", strip patches " + std::to_string(strips.rows) + ", square patches " +
                    std::to_string(squares.rows)};
}

Outcome gradient_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto att = grad_check_attention(kSeed, kGradTolAttention);
    const auto full = grad_check_model(kSeed, kGradTolModel);
    const double secs = seconds_since(t0);
    return {att.passed() && full.passed() && secs < kGradSeconds,
            "toy model " + fmt("%.2e", full.max_rel_error) + ", attention " + fmt("%.2e", att.max_rel_error) + ", " +
                fmt("%.2f s", secs)};
}

Outcome residual_norm() {
    vit::VitConfig c;
    c.image_h = c.image_w = 18;
    c.channels = 6;
    c.embed_dim = 16;
    c.heads = 4;
    c.depth = 2;
    c.mlp_dim = 32;
    std::mt19937_64 rng(kSeed);
    std::normal_distribution<double> g;

    ParamStore zero;
    vit::add_parameters(zero, c, rng);
    for (auto& p : zero.all())
        if (p.name.find(".block") != std::string::npos) p.value.fill(0.0);
    ag::Tape t0(false);
    Matrix tok(c.num_patches() + 1, c.embed_dim);
    for (double& v : tok.data) v = g(rng);
    const bool identity = vit::encode(t0.constant(tok), vit::bind(t0, zero, c), c.heads).value() == tok;

    ParamStore store;
    vit::add_parameters(store, c, rng);
    for (auto& p : store.all()) init_normal(p, rng, 0.3);
    ag::Tape t(false);
    Matrix px(c.image_h * c.image_w, c.channels);
    for (double& v : px.data) v = g(rng);
    vit::AttentionProbe probe;
    vit::forward(t.constant(px), vit::bind(t, store, c), c, &probe);
    double softmax_err = 0.0;
    for (const auto& p : probe.probabilities)
        for (std::size_t i = 0; i < p.rows; ++i) {
            double s = 0.0;
            for (double v : p.row(i)) s += v;
            softmax_err = std::max(softmax_err, std::abs(s - 1.0));
        }

    Matrix x(50, c.embed_dim);
    for (double& v : x.data) v = 5.0 + 20.0 * g(rng);
    const Matrix ln = ag::layer_norm(t.constant(x), t.constant(Matrix(1, c.embed_dim, 1.0)),
                                     t.constant(Matrix(1, c.embed_dim)), vit::kLayerNormEps)
                          .value();
    double mean_err = 0.0, var_err = 0.0;
    for (std::size_t i = 0; i < ln.rows; ++i) {
        double mean = 0.0, var = 0.0;
        for (double v : ln.row(i)) mean += v;
        mean /= static_cast<double>(ln.cols);
        for (double v : ln.row(i)) var += (v - mean) * (v - mean);
        var /= static_cast<double>(ln.cols);
        mean_err = std::max(mean_err, std::abs(mean));
        var_err = std::max(var_err, std::abs(var - 1.0));
    }
    const bool ok = identity && softmax_err <= kSoftmaxTol && mean_err <= kLayerNormTol && var_err <= kLayerNormTol;
    return {ok, std::string("identity ") + (identity ? "exact" : "BROKEN") + ", softmax row error " +
                    fmt("%.1e", softmax_err) + ", layer norm mean " + fmt("%.1e", mean_err) + " var " +
                    fmt("%.1e", var_err)};
}

Outcome clustering_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> x{1, 0}, y{0, 1}, nx{-1, 0}, a{1, 2, 3};
    const bool units = clustering::cosine_distance(a, a) == 0.0 && clustering::cosine_distance(x, y) == 0.5 &&
                       clustering::cosine_distance(x, nx) == 1.0;

    const auto samples = data::synth_generate(data::default_regimes(), {100, 100, 100, 100}, kSeed);
    std::vector<gaf::FeatureMatrix> d;
    for (const auto& s : samples) d.push_back(s.features);
    const auto elbow = clustering::elbow_select(d, clustering::default_grid());
    const auto model = clustering::qb_cluster(d, elbow.threshold);
    const std::size_t k = model.num_clusters();

    // best agreement over all cluster-to-class matchings
    std::vector<std::vector<std::size_t>> overlap(k, std::vector<std::size_t>(4, 0));
    for (std::size_t i = 0; i < d.size(); ++i) ++overlap[model.assignments[i]][*samples[i].label];
    std::vector<std::size_t> perm(std::max<std::size_t>(k, 4));
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t hits = 0;
        for (std::size_t c = 0; c < k; ++c)
            if (perm[c] < 4) hits += overlap[c][perm[c]];
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double agreement = static_cast<double>(best) / static_cast<double>(d.size());
    const double secs = seconds_since(t0);
    return {units && k == 4 && agreement >= kAgreementMin && secs < kClusterSeconds,
            "theta " + fmt("%.2f", elbow.threshold) + " -> " + std::to_string(k) + " clusters, agreement " +
                fmt("%.3f", agreement) + ", unit distances " + (units ? "exact" : "WRONG") + ", " +
                fmt("%.2f s", secs)};
}

double spearman(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[idx[r]] = static_cast<double>(r);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (rank[i] - static_cast<double>(i)) * (rank[i] - static_cast<double>(i));
    const double nn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

std::vector<double> val_losses(const fs::path& history) {
    std::ifstream in(history);
    std::string line;
    std::getline(in, line);
    std::vector<double> out;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        for (int c = 0; c < 4 && std::getline(ss, cell, ','); ++c)
            if (c == 3) out.push_back(std::stod(cell));
    }
    return out;
}

struct TrainRun {
    bool ok = false;
    fs::path dir;
    nlohmann::json metrics;
};

TrainRun train_and_eval(const fs::path& data_dir, const fs::path& dir, std::size_t epochs,
                        const std::vector<std::string>& extra) {
    TrainRun r;
    r.dir = dir;
    fs::create_directories(dir);
    const fs::path log = dir / "log.txt";
    std::vector<std::string> train{"train", "--data", (data_dir / "trips.csv").string(), "--epochs",
                                   std::to_string(epochs), "--seed", std::to_string(kSeed), "--threads", "1", "-o",
                                   dir.string()};
    train.insert(train.end(), extra.begin(), extra.end());
    if (cli(train, log) != 0) return r;
    const fs::path eval_dir = dir / "eval";
    if (cli({"eval", "--model", (dir / "model.gvt").string(), "--data", (data_dir / "trips.csv").string(),
             "--split-file", (dir / "split.csv").string(), "--subset", "test", "-o", eval_dir.string()},
            log) != 0)
        return r;
    r.metrics = nlohmann::json::parse(slurp(eval_dir / "metrics.json"));
    r.ok = true;
    return r;
}

Outcome end_to_end(const fs::path& work, TrainRun& run) {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path data_dir = work / "synth";
    if (cli({"synth", "--counts", "250,250,250,250", "--seed", std::to_string(kSeed), "-o", data_dir.string()},
            work / "synth.log") != 0)
        return {false, "synth failed"};
    run = train_and_eval(data_dir, work / "run1", kTrainEpochs, {});
    if (!run.ok) return {false, "train/eval failed"};
    const double acc = run.metrics["accuracy"].get<double>();
    const double f1 = run.metrics["macro"]["f1"].get<double>();
    const auto losses = val_losses(run.dir / "history.csv");
    const double rho = losses.size() >= 10 ? spearman({losses.begin(), losses.begin() + 10}) : 1.0;
    const bool decreased = losses.size() >= 10 && losses[9] < losses[0];
    const double secs = seconds_since(t0);
    return {acc >= kTestAccuracyMin && f1 >= kMacroF1Min && rho <= kTrendRhoMax && decreased && secs < kTrainSeconds,
            "test accuracy " + fmt("%.4f", acc) + ", macro-F1 " + fmt("%.4f", f1) + ", val-loss trend rho " +
                fmt("%.3f", rho) + ", " + fmt("%.0f s", secs)};
}

Outcome metrics_oracle() {
    std::mt19937_64 rng(kSeed);
    const std::size_t K = 4;
    std::vector<std::size_t> t(100), p(100);
    for (auto& v : t) v = rng() % K;
    for (auto& v : p) v = rng() % K;
    const auto r = metrics::report(metrics::confusion(t, p, K));
    bool exact = true, harmonic = true;
    for (std::size_t k = 0; k < K; ++k) {
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const bool is_t = t[i] == k, is_p = p[i] == k;
            tp += is_t && is_p;
            fp += !is_t && is_p;
            fn += is_t && !is_p;
            tn += !is_t && !is_p;
        }
        const auto& m = r.per_class[k];
        const double prec = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double rec = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        const double acc = static_cast<double>(tp + tn) / 100.0;
        exact &= m.tp == tp && m.fp == fp && m.fn == fn && m.tn == tn && m.precision == prec && m.recall == rec &&
                 m.f1 == f1 && m.accuracy == acc;
        if (m.precision > 0 && m.recall > 0)
            harmonic &= std::abs(m.f1 - 2.0 / (1.0 / m.precision + 1.0 / m.recall)) <= 1e-15;
    }
    std::size_t trace = 0;
    for (std::size_t i = 0; i < t.size(); ++i) trace += t[i] == p[i];
    exact &= r.accuracy == static_cast<double>(trace) / 100.0;
    return {exact && harmonic, std::string("one-vs-rest counts ") + (exact ? "exact" : "MISMATCH") +
                                   ", harmonic identity " + (harmonic ? "holds" : "BROKEN")};
}

Outcome determinism(const fs::path& work, const TrainRun& first) {
    if (!first.ok) return {false, "criterion 6 run unavailable"};
    const TrainRun second = train_and_eval(work / "synth", work / "run2", kTrainEpochs, {});
    if (!second.ok) return {false, "repeat run failed"};
    const bool hist = slurp(first.dir / "history.csv") == slurp(second.dir / "history.csv");
    const bool ckpt = slurp(first.dir / "model.gvt") == slurp(second.dir / "model.gvt");
    return {hist && ckpt, std::string("history ") + (hist ? "identical" : "DIFFERS") + ", checkpoint " +
                              (ckpt ? "identical" : "DIFFERS")};
}

Outcome ablations(const fs::path& work) {
    std::string detail;
    bool ok = true;
    for (const std::string flag : {"--no-attention", "--no-gaf"}) {
        const TrainRun r = train_and_eval(work / "synth", work / ("ablation" + flag.substr(4)), kAblationEpochs, {flag});
        const bool good = r.ok && r.metrics.contains("accuracy") && std::isfinite(r.metrics["accuracy"].get<double>());
        ok &= good;
        if (!detail.empty()) detail += ", ";
        detail += flag + (good ? " accuracy " + fmt("%.4f", r.metrics["accuracy"].get<double>()) : " FAILED");
    }
    return {ok, detail};
}

} // namespace

int main(int argc, char** argv) {
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "gafvit_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    int failures = 0;
    auto report = [&](int id, const std::string& title, const Outcome& o) {
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << ". " << title << ": " << o.detail << std::endl;
        failures += o.pass ? 0 : 1;
    };

    report(1, "GAF invariants", gaf_invariants());
    report(2, "image and patch sizes", image_sizes());
    report(3, "gradient oracle", gradient_oracle());
    report(4, "residual and normalization", residual_norm());
    report(5, "clustering oracle", clustering_oracle());
    TrainRun run;
    report(6, "end-to-end training", end_to_end(work, run));
    report(7, "metrics oracle", metrics_oracle());
    report(8, "determinism", determinism(work, run));
    report(9, "ablation plumbing", ablations(work));

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
