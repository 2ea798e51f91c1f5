#include "gafvit/trainer.hpp"

#include "gafvit/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace gafvit {

namespace ag = autograd;

void TrainConfig::validate() const {
    if (batch_size == 0) raise(Errc::InvalidArgument, "batch size must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        raise(Errc::InvalidArgument, "learning rate must be positive");
    if (!(weight_decay >= 0.0)) raise(Errc::InvalidArgument, "weight decay must be non-negative");
    if (!(train_fraction > 0.0 && val_fraction > 0.0 && test_fraction > 0.0))
        raise(Errc::InvalidArgument, "split fractions must be positive");
    if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
        raise(Errc::InvalidArgument, "split fractions must sum to 1");
}

SplitIndices split_dataset(std::size_t n, const TrainConfig& config) {
    config.validate();
    if (n < 10) raise(Errc::TooFewSamples, "need at least 10 samples to split, got " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed);
    // Fisher-Yates by hand: std::shuffle's draw sequence is library specific.
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.val_fraction + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.test_fraction + 1e-9));
    const std::size_t n_train = n - n_val - n_test;
    SplitIndices s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    return s;
}

namespace {

std::size_t argmax(const Matrix& logits) {
    return static_cast<std::size_t>(std::max_element(logits.data.begin(), logits.data.end()) - logits.data.begin());
}

std::size_t label_of(const data::Sample& s) {
    if (!s.label) raise(Errc::SchemaError, "sample '" + s.id + "' has no label");
    return *s.label;
}

} // namespace

double accumulate_batch(GafVitModel& model, const std::vector<const data::Sample*>& batch, std::size_t* correct) {
    if (batch.empty()) return 0.0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const data::Sample* s : batch) {
        ag::Tape tape;
        ag::Var logits = model.forward(tape, s->features);
        const std::size_t label = label_of(*s);
        ag::Var l = ag::cross_entropy(logits, label);
        if (correct && argmax(logits.value()) == label) ++*correct;
        loss += l.item();
        tape.backward(l, inv);
    }
    return loss * inv;
}

Evaluation evaluate(GafVitModel& model, const std::vector<data::Sample>& samples) {
    Evaluation ev;
    if (samples.empty()) return ev;
    std::size_t correct = 0;
    for (const auto& s : samples) {
        ag::Tape tape(false);
        ag::Var logits = model.forward(tape, s.features);
        const std::size_t pred = argmax(logits.value());
        ev.predictions.push_back(pred);
        if (s.label) {
            ev.loss += ag::cross_entropy(logits, *s.label).item();
            if (pred == *s.label) ++correct;
        }
    }
    ev.loss /= static_cast<double>(samples.size());
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
    return ev;
}

FitResult fit(GafVitModel& model, const std::vector<data::Sample>& train, const std::vector<data::Sample>& val,
              const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    FitResult result;
    result.best = model.params();
    result.best_val_loss = std::numeric_limits<double>::infinity();
    if (config.epochs == 0) return result;
    if (train.empty()) raise(Errc::TooFewSamples, "training set is empty");
    for (const auto& s : train) label_of(s);

    AdamW optimizer({config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay});
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(order[i], order[j]);
        }
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<const data::Sample*> batch;
            for (std::size_t k = start; k < end; ++k) batch.push_back(&train[order[k]]);
            model.params().zero_grad();
            loss_sum += accumulate_batch(model, batch, &correct) * static_cast<double>(batch.size());
            optimizer.step(model.params());
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(train.size());
        rec.train_acc = static_cast<double>(correct) / static_cast<double>(train.size());
        if (!val.empty()) {
            const Evaluation ev = evaluate(model, val);
            rec.val_loss = ev.loss;
            rec.val_acc = ev.accuracy;
        } else {
            rec.val_loss = rec.train_loss;
            rec.val_acc = rec.train_acc;
        }
        if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss))
            raise(Errc::NonFiniteGradient, "loss became non-finite at epoch " + std::to_string(epoch));
        result.history.push_back(rec);
        if (rec.val_loss < result.best_val_loss) {
            result.best_val_loss = rec.val_loss;
            result.best_epoch = epoch;
            result.best = model.params();
        }
        if (on_epoch) on_epoch(rec);
    }
    return result;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
    std::ofstream out(path);
    if (!out) raise(Errc::IoError, "cannot open " + path.string());
    auto num = [](double v) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, end);
    };
    out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    for (const auto& r : history)
        out << r.epoch << ',' << num(r.train_loss) << ',' << num(r.train_acc) << ',' << num(r.val_loss) << ','
            << num(r.val_acc) << '\n';
}

} // namespace gafvit
