#include "doctest.h"

#include "gafvit/error.hpp"
#include "gafvit/metrics.hpp"

#include <algorithm>
#include <random>

using namespace gafvit;
using namespace gafvit::metrics;

TEST_CASE("confusion counts") {
    const std::vector<std::size_t> t{0, 1, 1, 2}, p{0, 1, 2, 2};
    auto cm = confusion(t, p, 3);
    CHECK(cm.counts[1][2] == 1);
    for (std::size_t k = 0; k < 3; ++k) CHECK(cm.counts[k][k] == 1);
    CHECK(cm.total() == 4);
    CHECK(cm.trace() == 3);

    auto perfect = confusion(t, t, 3);
    CHECK(perfect.trace() == perfect.total());
    const std::vector<std::size_t> zeros(4, 0);
    auto col = confusion(t, zeros, 3);
    CHECK(col.counts[1][0] == 2);
    CHECK(col.counts[1][1] == 0);

    const std::vector<std::size_t> shorter{0};
    try {
        confusion(t, shorter, 3);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::LengthMismatch);
    }
    try {
        confusion(t, p, 2);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::LabelOutOfRange);
    }
}

TEST_CASE("report hand example") {
    const std::vector<std::size_t> t{0, 1, 1, 2}, p{0, 1, 2, 2};
    auto r = report(confusion(t, p, 3));
    CHECK(r.per_class[1].recall == 0.5);
    CHECK(r.per_class[2].precision == 0.5);
    CHECK(r.accuracy == 0.75);
    CHECK(r.per_class[0].f1 == 1.0);
}

TEST_CASE("perfect predictions give ones") {
    const std::vector<std::size_t> t{0, 1, 2, 3, 3, 2};
    auto r = report(confusion(t, t, 4));
    CHECK(r.accuracy == 1.0);
    CHECK(r.macro_precision == 1.0);
    CHECK(r.macro_recall == 1.0);
    CHECK(r.macro_f1 == 1.0);
}

TEST_CASE("absent classes are flagged zeros") {
    const std::vector<std::size_t> t{0, 1}, p{0, 1};
    auto r = report(confusion(t, p, 3));
    CHECK(r.per_class[2].precision == 0.0);
    CHECK(r.per_class[2].precision_undefined);
    CHECK(r.per_class[2].recall_undefined);
    CHECK(r.per_class[2].f1_undefined);
    CHECK(r.macro_precision == doctest::Approx(2.0 / 3.0));
    CHECK(to_table(r).find('*') != std::string::npos);
    auto j = to_json(r, confusion(t, p, 3));
    CHECK(j["per_class"][2]["precision_undefined"] == true);
    CHECK(j["total"] == 2);
}

TEST_CASE("empty matrix") {
    ConfusionMatrix cm{2, {{0, 0}, {0, 0}}};
    try {
        report(cm);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyMatrix);
    }
}

TEST_CASE("permutation invariance and harmonic mean") {
    std::mt19937_64 rng(4);
    std::vector<std::size_t> t(60), p(60);
    for (auto& v : t) v = rng() % 4;
    for (auto& v : p) v = rng() % 4;
    auto r = report(confusion(t, p, 4));
    std::vector<std::size_t> idx(60);
    for (std::size_t i = 0; i < 60; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::size_t> t2, p2;
    for (auto i : idx) {
        t2.push_back(t[i]);
        p2.push_back(p[i]);
    }
    auto r2 = report(confusion(t2, p2, 4));
    CHECK(r2.macro_f1 == r.macro_f1);
    CHECK(r2.accuracy == r.accuracy);
    for (const auto& m : r.per_class)
        if (m.precision > 0 && m.recall > 0)
            CHECK(m.f1 == doctest::Approx(2.0 / (1.0 / m.precision + 1.0 / m.recall)).epsilon(1e-14));
}
