#include "gafvit/cli.hpp"

#include "gafvit/checkpoint.hpp"
#include "gafvit/clustering.hpp"
#include "gafvit/config.hpp"
#include "gafvit/data.hpp"
#include "gafvit/error.hpp"
#include "gafvit/gradcheck.hpp"
#include "gafvit/kernels.hpp"
#include "gafvit/metrics.hpp"
#include "gafvit/synth.hpp"
#include "gafvit/trainer.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace gafvit::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string out = ".";
    std::string config;
    unsigned threads = 1;
};

struct SynthOpts {
    std::string counts = "250,250,250,250";
    std::uint64_t seed = 0;
};

struct ClusterOpts {
    std::string data;
    std::string grid = "0.02:0.5:0.02";
    double theta = 0.0;
    bool cos_of_ratio = false;
};

struct TransformOpts {
    std::string data;
    std::string trip;
    std::string degenerate = "skip";
};

struct TrainOpts {
    std::string data;
    std::string labels;
    std::string degenerate = "skip";
    std::uint64_t seed = 0;
    std::size_t epochs = 50;
    std::size_t batch_size = 8;
    double lr = 1e-5;
    double weight_decay = 0.01;
    std::string split = "0.8,0.1,0.1";
    std::string patch_mode = "strip";
    std::size_t patch_size = 9;
    std::size_t embed_dim = 128;
    std::size_t depth = 4;
    std::size_t heads = 4;
    std::size_t mlp_dim = 128;
    bool no_attention = false;
    bool no_gaf = false;
};

struct EvalOpts {
    std::string model;
    std::string data;
    std::string labels;
    std::string split_file;
    std::string subset = "test";
    std::string degenerate = "skip";
};

struct ClassifyOpts {
    std::string model;
    std::string data;
    std::string trip;
};

struct GradcheckOpts {
    std::uint64_t seed = 1;
};

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
    T v{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw CLI::ValidationError(what, "not a number: '" + s + "'");
    return v;
}

std::uint64_t resolve_seed(const CLI::App& sub, std::uint64_t flag_value) {
    if (sub.get_option("--seed")->count() > 0) return flag_value;
    if (const char* env = std::getenv("GAFVIT_SEED"); env && *env)
        return parse_number<std::uint64_t>(env, "GAFVIT_SEED");
    return flag_value;
}

fs::path prepare_out(const Common& c) {
    fs::path out(c.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) raise(Errc::IoError, "cannot create output directory " + out.string() + ": " + ec.message());
    return out;
}

// Splices config-file entries in front of the subcommand's own flags, so later
// command-line values win under TakeLast.
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
    auto it = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a == "--config"; });
    std::string path;
    if (it != args.end() && it + 1 != args.end()) path = *(it + 1);
    for (const auto& a : args)
        if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    if (path.empty() || args.empty()) return args;
    CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(args.front());
    } catch (const CLI::OptionNotFound&) {
        return args;
    }
    std::vector<std::string> injected;
    for (const auto& [key, value] : config::load(path)) {
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (!opt) raise(Errc::SchemaError, path + ": unknown key '" + key + "' for " + args.front());
        if (key == "config") continue;
        if (opt->get_type_size() == 0) {
            if (value == "true") injected.push_back("--" + key);
            else if (value != "false") raise(Errc::SchemaError, path + ": '" + key + "' must be true or false");
        } else {
            injected.push_back("--" + key);
            injected.push_back(value);
        }
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
    return args;
}

void echo_config(const CLI::App& sub, const fs::path& out_dir) {
    config::Entries entries;
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string key = opt->get_lnames().front();
        if (key == "help" || key == "config") continue;
        std::string value;
        if (opt->get_type_size() == 0) {
            value = opt->count() > 0 ? "true" : "false";
        } else if (opt->count() > 0) {
            value = opt->results().back();
        } else {
            value = opt->get_default_str();
        }
        entries.emplace_back(key, value);
    }
    config::write(out_dir / "config.resolved", entries);
}

enum class DegeneratePolicy { Skip, Error };

DegeneratePolicy degenerate_policy(const std::string& s) {
    if (s == "skip") return DegeneratePolicy::Skip;
    return DegeneratePolicy::Error;
}

// Drops (or rejects) samples with a constant feature column, which the GAF
// normalization cannot encode.
void filter_degenerate(std::vector<data::Sample>& samples, DegeneratePolicy policy, std::ostream& err) {
    std::vector<data::Sample> kept;
    kept.reserve(samples.size());
    for (auto& s : samples) {
        bool degenerate = false;
        std::string which;
        for (std::size_t c = 0; c < s.features.features() && !degenerate; ++c) {
            const auto col = s.features.column(c);
            const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
            if (*lo == *hi) {
                degenerate = true;
                which = s.features.feature_names[c];
            }
        }
        if (!degenerate) {
            kept.push_back(std::move(s));
            continue;
        }
        if (policy == DegeneratePolicy::Error)
            raise(Errc::DegenerateSeries, "sample '" + s.id + "': feature '" + which + "' is constant");
        err << "skipping sample '" << s.id << "': feature '" << which << "' is constant\n";
    }
    samples = std::move(kept);
}

std::vector<data::Sample> load_samples(const std::string& path, std::ostream& err) {
    if (path.empty()) raise(Errc::InvalidArgument, "--data is required");
    data::CleanLog log;
    auto samples = data::prepare_samples(data::load_trips(path), &log);
    for (const auto& m : log.messages) err << m << '\n';
    if (samples.empty()) raise(Errc::EmptyFile, path + ": no usable trips");
    return samples;
}

std::string default_labels(const std::string& data_path) {
    return (fs::path(data_path).parent_path() / "labels.csv").string();
}

std::string file_name_for(const std::string& channel) {
    std::string s = channel;
    std::replace(s.begin(), s.end(), '/', '_');
    return s + ".pgm";
}

int run_synth(const CLI::App& sub, const Common& c, const SynthOpts& o, std::ostream& out) {
    std::vector<std::size_t> counts;
    for (const auto& s : split_list(o.counts, ',')) counts.push_back(parse_number<std::size_t>(s, "--counts"));
    const auto regimes = data::default_regimes();
    if (counts.size() != regimes.size())
        throw CLI::ValidationError("--counts", "expected " + std::to_string(regimes.size()) + " comma-separated counts");
    if (std::any_of(counts.begin(), counts.end(), [](std::size_t n) { return n == 0; }))
        throw CLI::ValidationError("--counts", "counts must be positive");
    const std::uint64_t seed = resolve_seed(sub, o.seed);
    const fs::path dir = prepare_out(c);
    const auto samples = data::synth_generate(regimes, counts, seed);
    std::vector<data::Trip> trips;
    trips.reserve(samples.size());
    for (const auto& s : samples) trips.push_back(data::to_trip(s));
    data::write_trips(dir / "trips.csv", trips);
    data::write_labels(dir / "labels.csv", samples);
    echo_config(sub, dir);
    out << "wrote " << samples.size() << " trips to " << (dir / "trips.csv").string() << " (seed " << seed << ")\n";
    return kOk;
}

int run_cluster(const CLI::App& sub, const Common& c, const ClusterOpts& o, std::ostream& out, std::ostream& err) {
    auto samples = load_samples(o.data, err);
    std::vector<gaf::FeatureMatrix> matrices;
    for (const auto& s : samples) matrices.push_back(s.features);
    const auto form = o.cos_of_ratio ? clustering::DistanceForm::LiteralCosOfRatio : clustering::DistanceForm::Angular;
    const fs::path dir = prepare_out(c);

    double theta = o.theta;
    if (theta <= 0.0) {
        const auto parts = split_list(o.grid, ':');
        if (parts.size() != 3) throw CLI::ValidationError("--grid", "expected start:stop:step");
        const double start = parse_number<double>(parts[0], "--grid");
        const double stop = parse_number<double>(parts[1], "--grid");
        const double step = parse_number<double>(parts[2], "--grid");
        if (!(step > 0.0) || !(start > 0.0) || stop < start) throw CLI::ValidationError("--grid", "bad range");
        std::vector<double> grid;
        for (std::size_t i = 0;; ++i) {
            const double v = start + step * static_cast<double>(i);
            if (v > stop + 1e-12) break;
            grid.push_back(v);
        }
        const auto elbow = clustering::elbow_select(matrices, grid, form);
        clustering::write_elbow_csv(dir / "elbow.csv", elbow);
        if (elbow.degenerate) err << "warning: " << elbow.warning << '\n';
        theta = elbow.threshold;
    }
    const auto model = clustering::qb_cluster(matrices, theta, form);
    const auto labeled = clustering::label_dataset(model, matrices);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].label = labeled.labels[i];
    data::write_labels(dir / "labels.csv", samples);
    clustering::write_summary_csv(dir / "summary.csv", labeled.summary);
    echo_config(sub, dir);

    out << "threshold " << theta << ", " << model.num_clusters() << " clusters\n";
    out << "class  count  speed_mean  accel_std  jerk_std\n";
    char buf[128];
    for (const auto& s : labeled.summary) {
        std::snprintf(buf, sizeof buf, "%-6zu %-6zu %-11.3f %-10.3f %.3f\n", s.label, s.count, s.speed_mean, s.accel_std,
                      s.jerk_std);
        out << buf;
    }
    return kOk;
}

int run_transform(const CLI::App& sub, const Common& c, const TransformOpts& o, std::ostream& out, std::ostream& err) {
    auto samples = load_samples(o.data, err);
    if (!o.trip.empty()) {
        std::erase_if(samples, [&](const data::Sample& s) { return s.id != o.trip; });
        if (samples.empty()) raise(Errc::InvalidArgument, "trip '" + o.trip + "' not found in " + o.data);
    }
    filter_degenerate(samples, degenerate_policy(o.degenerate), err);
    const fs::path dir = prepare_out(c);
    std::size_t files = 0;
    for (const auto& s : samples) {
        const auto image = gaf::encode_matrix(s.features, c.threads);
        const fs::path trip_dir = dir / s.id;
        fs::create_directories(trip_dir);
        for (std::size_t ch = 0; ch < image.channels(); ++ch) {
            gaf::render_channel(image, ch, trip_dir / file_name_for(image.channel_names[ch]));
            ++files;
        }
    }
    echo_config(sub, dir);
    out << "wrote " << files << " images for " << samples.size() << " trips under " << dir.string() << '\n';
    return kOk;
}

int run_train(const CLI::App& sub, const Common& c, const TrainOpts& o, std::ostream& out, std::ostream& err) {
    TrainConfig tc;
    tc.epochs = o.epochs;
    tc.batch_size = o.batch_size;
    tc.learning_rate = o.lr;
    tc.weight_decay = o.weight_decay;
    const auto fractions = split_list(o.split, ',');
    if (fractions.size() != 3) throw CLI::ValidationError("--split", "expected train,val,test fractions");
    tc.train_fraction = parse_number<double>(fractions[0], "--split");
    tc.val_fraction = parse_number<double>(fractions[1], "--split");
    tc.test_fraction = parse_number<double>(fractions[2], "--split");
    tc.seed = resolve_seed(sub, o.seed);
    tc.validate();

    auto samples = load_samples(o.data, err);
    data::attach_labels(o.labels.empty() ? default_labels(o.data) : o.labels, samples);
    if (!o.no_gaf) filter_degenerate(samples, degenerate_policy(o.degenerate), err);

    ModelConfig mc = ModelConfig::for_input(samples.front().features.steps(), samples.front().features.feature_names);
    mc.vit.patch_mode = vit::patch_mode_from_string(o.patch_mode);
    mc.vit.patch_size = o.patch_size;
    mc.vit.embed_dim = o.embed_dim;
    mc.vit.depth = o.depth;
    mc.vit.heads = o.heads;
    mc.vit.mlp_dim = o.mlp_dim;
    std::size_t classes = 0;
    for (const auto& s : samples) classes = std::max(classes, *s.label + 1);
    mc.vit.num_classes = std::max<std::size_t>(classes, 2);
    mc.ablation.no_attention = o.no_attention;
    mc.ablation.no_gaf = o.no_gaf;

    const auto split = split_dataset(samples.size(), tc);
    auto pick = [&](const std::vector<std::size_t>& idx) {
        std::vector<data::Sample> v;
        for (std::size_t i : idx) v.push_back(samples[i]);
        return v;
    };
    const auto train = pick(split.train);
    const auto val = pick(split.val);

    const fs::path dir = prepare_out(c);
    {
        std::ofstream f(dir / "split.csv");
        if (!f) raise(Errc::IoError, "cannot write split.csv");
        f << "trip_id,subset\n";
        for (std::size_t i : split.train) f << samples[i].id << ",train\n";
        for (std::size_t i : split.val) f << samples[i].id << ",val\n";
        for (std::size_t i : split.test) f << samples[i].id << ",test\n";
    }
    echo_config(sub, dir);

    GafVitModel model(mc, tc.seed);
    out << "training on " << train.size() << " samples, validating on " << val.size() << " (" << model.params().total_size()
        << " parameters, kernels " << kernels::active().name << ")\n";
    auto result = fit(model, train, val, tc, [&](const EpochRecord& r) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "epoch %3zu  train_loss %.5f  train_acc %.4f  val_loss %.5f  val_acc %.4f\n",
                      r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc);
        out << buf << std::flush;
    });
    write_history_csv(dir / "history.csv", result.history);
    GafVitModel best(mc, std::move(result.best));
    save_checkpoint(dir / "model.gvt", best);
    out << "best epoch " << result.best_epoch << ", checkpoint " << (dir / "model.gvt").string() << '\n';
    return kOk;
}

int run_eval(const CLI::App& sub, const Common& c, const EvalOpts& o, std::ostream& out, std::ostream& err) {
    GafVitModel model = load_checkpoint(o.model);
    auto samples = load_samples(o.data, err);
    data::attach_labels(o.labels.empty() ? default_labels(o.data) : o.labels, samples);
    if (!o.split_file.empty() && o.subset != "all") {
        std::ifstream f(o.split_file);
        if (!f) raise(Errc::IoError, "cannot open " + o.split_file);
        std::set<std::string> keep;
        std::string line;
        std::getline(f, line);
        while (std::getline(f, line)) {
            const auto parts = split_list(line, ',');
            if (parts.size() == 2 && parts[1] == o.subset) keep.insert(parts[0]);
        }
        std::erase_if(samples, [&](const data::Sample& s) { return !keep.contains(s.id); });
        if (samples.empty()) raise(Errc::EmptyFile, o.split_file + ": no samples in subset '" + o.subset + "'");
    }
    if (!model.config().ablation.no_gaf) filter_degenerate(samples, degenerate_policy(o.degenerate), err);

    const auto ev = evaluate(model, samples);
    std::vector<std::size_t> truth;
    for (const auto& s : samples) {
        if (*s.label >= model.config().vit.num_classes)
            raise(Errc::LabelOutOfRange, "sample '" + s.id + "' has a class the model does not know");
        truth.push_back(*s.label);
    }
    const auto cm = metrics::confusion(truth, ev.predictions, model.config().vit.num_classes);
    const auto rep = metrics::report(cm);
    const fs::path dir = prepare_out(c);
    {
        std::ofstream f(dir / "metrics.json");
        if (!f) raise(Errc::IoError, "cannot write metrics.json");
        auto j = metrics::to_json(rep, cm);
        j["loss"] = ev.loss;
        j["samples"] = samples.size();
        f << j.dump(2) << '\n';
    }
    metrics::write_confusion_csv(dir / "confusion.csv", cm);
    echo_config(sub, dir);
    out << metrics::to_table(rep);
    return kOk;
}

int run_classify(const ClassifyOpts& o, std::ostream& out, std::ostream& err) {
    GafVitModel model = load_checkpoint(o.model);
    auto samples = load_samples(o.data, err);
    if (!o.trip.empty()) {
        std::erase_if(samples, [&](const data::Sample& s) { return s.id != o.trip; });
        if (samples.empty()) raise(Errc::InvalidArgument, "trip '" + o.trip + "' not found in " + o.data);
    }
    for (const auto& s : samples) out << s.id << ',' << model.predict(s.features) << '\n';
    return kOk;
}

int run_gradcheck(const CLI::App& sub, const GradcheckOpts& o, std::ostream& out) {
    const std::uint64_t seed = resolve_seed(sub, o.seed);
    const auto att = grad_check_attention(seed);
    out << "attention block\n" << to_string(att);
    const auto full = grad_check_model(seed);
    out << "toy model\n" << to_string(full);
    return att.passed() && full.passed() ? kOk : kNumericError;
}

} // namespace

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"GAF-ViT driving behavior classification"};
    app.name("gafvit");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-o,--out", common.out, "Output directory");
        sub->add_option("--config", common.config, "Flat key = value config file; flags override it");
        sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
    };
    auto add_degenerate = [](CLI::App* sub, std::string& target) {
        sub->add_option("--degenerate", target, "Constant feature columns: skip or error")
            ->check(CLI::IsMember({"skip", "error"}));
    };

    SynthOpts synth;
    auto* s_synth = app.add_subcommand("synth", "Generate a labeled synthetic trip dataset");
    add_common(s_synth);
    s_synth->add_option("--counts", synth.counts, "Trips per regime, comma separated");
    s_synth->add_option("--seed", synth.seed, "Random seed (falls back to GAFVIT_SEED)");

    ClusterOpts cluster;
    auto* s_cluster = app.add_subcommand("cluster", "Cluster trips by endpoint direction and write labels");
    add_common(s_cluster);
    s_cluster->add_option("--data", cluster.data, "Trips CSV")->required();
    s_cluster->add_option("--grid", cluster.grid, "Threshold grid start:stop:step for the elbow search");
    s_cluster->add_option("--theta", cluster.theta, "Fixed threshold in (0, 1]; skips the elbow search");
    s_cluster->add_flag("--cos-of-ratio", cluster.cos_of_ratio, "Apply cos() to the cosine ratio before arccos");

    TransformOpts transform;
    auto* s_transform = app.add_subcommand("transform", "Write GAF channel images as PGM files");
    add_common(s_transform);
    s_transform->add_option("--data", transform.data, "Trips CSV")->required();
    s_transform->add_option("--trip", transform.trip, "Only this trip id");
    add_degenerate(s_transform, transform.degenerate);

    TrainOpts train;
    auto* s_train = app.add_subcommand("train", "Train the classifier");
    add_common(s_train);
    s_train->add_option("--data", train.data, "Trips CSV")->required();
    s_train->add_option("--labels", train.labels, "labels.csv (default: next to the data)");
    s_train->add_option("--seed", train.seed, "Random seed (falls back to GAFVIT_SEED)");
    s_train->add_option("--epochs", train.epochs);
    s_train->add_option("--batch-size", train.batch_size)->check(CLI::PositiveNumber);
    s_train->add_option("--lr", train.lr);
    s_train->add_option("--weight-decay", train.weight_decay);
    s_train->add_option("--split", train.split, "train,val,test fractions");
    s_train->add_option("--patch-mode", train.patch_mode)->check(CLI::IsMember({"strip", "square"}));
    s_train->add_option("--patch-size", train.patch_size);
    s_train->add_option("--embed-dim", train.embed_dim);
    s_train->add_option("--depth", train.depth);
    s_train->add_option("--heads", train.heads);
    s_train->add_option("--mlp-dim", train.mlp_dim);
    s_train->add_flag("--no-attention", train.no_attention, "Drop the channel attention stage");
    s_train->add_flag("--no-gaf", train.no_gaf, "Replace GAF encoding with a trainable linear reshape");
    add_degenerate(s_train, train.degenerate);

    EvalOpts eval;
    auto* s_eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    add_common(s_eval);
    s_eval->add_option("--model", eval.model, "Checkpoint (.gvt)")->required();
    s_eval->add_option("--data", eval.data, "Trips CSV")->required();
    s_eval->add_option("--labels", eval.labels, "labels.csv (default: next to the data)");
    s_eval->add_option("--split-file", eval.split_file, "split.csv written by train");
    s_eval->add_option("--subset", eval.subset, "Subset of the split file")
        ->check(CLI::IsMember({"train", "val", "test", "all"}));
    add_degenerate(s_eval, eval.degenerate);

    ClassifyOpts classify;
    auto* s_classify = app.add_subcommand("classify", "Predict the class of trips");
    add_common(s_classify);
    s_classify->add_option("--model", classify.model, "Checkpoint (.gvt)")->required();
    s_classify->add_option("--data", classify.data, "Trips CSV")->required();
    s_classify->add_option("--trip", classify.trip, "Only this trip id");

    GradcheckOpts gradcheck;
    auto* s_gradcheck = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients on toy models");
    add_common(s_gradcheck);
    s_gradcheck->add_option("--seed", gradcheck.seed);

    try {
        std::vector<std::string> args = apply_config(app, raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
        if (*s_synth) return run_synth(*s_synth, common, synth, out);
        if (*s_cluster) return run_cluster(*s_cluster, common, cluster, out, err);
        if (*s_transform) return run_transform(*s_transform, common, transform, out, err);
        if (*s_train) return run_train(*s_train, common, train, out, err);
        if (*s_eval) return run_eval(*s_eval, common, eval, out, err);
        if (*s_classify) return run_classify(classify, out, err);
        if (*s_gradcheck) return run_gradcheck(*s_gradcheck, gradcheck, out);
        return kUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return error_class(e.code()) == ErrorClass::Numeric ? kNumericError : kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

} // namespace gafvit::cli
