#include <catch_amalgamated.hpp>

#include <cmath>

#include "stancelab/eval.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace stancelab;
using Catch::Approx;

namespace {

ConfusionMatrix from_rows(std::vector<std::vector<std::size_t>> rows) {
    ConfusionMatrix cm(rows.size());
    for (std::size_t g = 0; g < rows.size(); ++g)
        for (std::size_t p = 0; p < rows.size(); ++p) cm.at(g, p) = rows[g][p];
    return cm;
}

std::vector<PredictionRecord> records(const std::vector<std::pair<std::size_t, std::size_t>>& gp,
                                      const std::string& prefix = "s") {
    std::vector<PredictionRecord> out;
    for (std::size_t i = 0; i < gp.size(); ++i)
        out.push_back({prefix + std::to_string(i), "t", gp[i].first, gp[i].second, std::nullopt});
    return out;
}

}  // namespace

TEST_CASE("confusion counts") {
    auto cm = confusion({0, 1, 2, 1}, {0, 1, 2, 1});
    CHECK(cm == from_rows({{1, 0, 0}, {0, 2, 0}, {0, 0, 1}}));
    auto one = confusion({0}, {1});
    CHECK(one.at(1, 0) == 1);
    CHECK(one.total() == 1);
    CHECK_THROWS_AS(confusion({}, {}), ConfigError);
    CHECK_THROWS_AS(confusion({0}, {0, 1}), ConfigError);
    CHECK_THROWS_AS(confusion({3}, {0}), ConfigError);
}

TEST_CASE("macro F1 over InFavor and Against") {
    CHECK(macro_f1_favor_against(from_rows({{5, 0, 0}, {0, 7, 0}, {0, 0, 3}})) == 1.0);
    CHECK(macro_f1_favor_against(from_rows({{0, 0, 5}, {0, 0, 7}, {0, 0, 3}})) == 0.0);
    auto cm = from_rows({{8, 1, 1}, {1, 9, 0}, {0, 0, 10}});
    CHECK(class_scores(cm, 0).f1 == Approx(16.0 / 19.0).epsilon(1e-12));
    CHECK(class_scores(cm, 0).f1 == Approx(0.8421).margin(1e-4));
    CHECK(class_scores(cm, 1).f1 == Approx(0.9).epsilon(1e-12));
    CHECK(macro_f1_favor_against(cm) == Approx((16.0 / 19.0 + 0.9) / 2).epsilon(1e-12));
    CHECK(macro_f1_favor_against(cm) == Approx(0.8711).margin(1e-4));
}

TEST_CASE("macro F1 matches an independent reference on random matrices") {
    Rng rng(40);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::vector<std::size_t>> m(3, std::vector<std::size_t>(3));
        for (auto& row : m)
            for (auto& v : row) v = rng.bernoulli(0.2) ? 0 : rng.below(30);
        auto cm = from_rows(m);
        const double got = macro_f1_favor_against(cm);
        CHECK(got == Approx(testing_support::reference_macro_f1(m)).margin(1e-12));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);

        auto more_none = m;
        more_none[2][2] += 1 + rng.below(50);
        CHECK(macro_f1_favor_against(from_rows(more_none)) == got);

        const bool diag = m[0][1] == 0 && m[0][2] == 0 && m[1][0] == 0 && m[1][2] == 0 && m[2][0] == 0 &&
                          m[2][1] == 0 && m[0][0] > 0 && m[1][1] > 0;
        CHECK((got == 1.0) == diag);
    }
}

TEST_CASE("failure report lists misclassified records in a stable order") {
    auto perfect = make_eval_result(records({{0, 0}, {1, 1}, {2, 2}}));
    CHECK(failure_report(perfect).empty());

    auto r = make_eval_result(records({{0, 0}, {1, 0}, {2, 2}, {0, 2}, {1, 1}, {2, 2}, {1, 0}, {0, 0}, {2, 2}, {1, 1}}));
    auto f = failure_report(r);
    REQUIRE(f.size() == 3);
    CHECK(f[0].id == "s3");
    CHECK(f[1].id == "s1");
    CHECK(f[2].id == "s6");
    CHECK(failure_report(r).front().id == f.front().id);
}

TEST_CASE("prediction files round trip") {
    testing_support::TempDir dir("eval");
    auto recs = records({{0, 1}, {2, 2}});
    recs[0].text = "tab\there";
    recs[0].sarcastic = true;
    write_file(dir / "p.tsv", format_records_tsv(recs));
    auto back = parse_records_tsv(dir / "p.tsv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].text == "tab\there");
    CHECK(back[0].sarcastic == std::optional<bool>(true));
    CHECK_FALSE(back[1].sarcastic.has_value());
    CHECK(back[0].predicted == 1);
}

TEST_CASE("sarcasm recovery examples") {
    std::vector<std::pair<std::size_t, std::size_t>> base_gp, fixed_gp, none_gp;
    std::map<std::string, bool> flags;
    for (std::size_t i = 0; i < 20; ++i) {
        base_gp.push_back({1, 0});
        fixed_gp.push_back({1, i < 17 ? 1u : 0u});
        none_gp.push_back({1, 2});
        flags["s" + std::to_string(i)] = true;
    }
    auto base = make_eval_result(records(base_gp));
    CHECK(sarcasm_recovery(base, make_eval_result(records(fixed_gp)), flags) == Approx(0.85).epsilon(1e-15));
    CHECK(sarcasm_recovery(base, make_eval_result(records(none_gp)), flags) == 0.0);
    std::vector<std::pair<std::size_t, std::size_t>> all(20, {1, 1});
    CHECK(sarcasm_recovery(base, make_eval_result(records(all)), flags) == 1.0);

    auto nobody = flags;
    for (auto& [k, v] : nobody) v = false;
    CHECK_THROWS_AS(sarcasm_recovery(base, make_eval_result(records(all)), nobody), ConfigError);
}

TEST_CASE("sarcasm recovery ignores samples outside its denominator") {
    Rng rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<std::size_t, std::size_t>> base, transfer;
        std::map<std::string, bool> flags;
        const std::size_t n = 5 + rng.below(30);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t g = rng.below(3);
            base.push_back({g, i == 0 ? (g + 1) % 3 : rng.below(3)});
            transfer.push_back({g, rng.below(3)});
            flags["s" + std::to_string(i)] = i == 0 || rng.bernoulli(0.5);
        }
        const double rate = sarcasm_recovery(make_eval_result(records(base)), make_eval_result(records(transfer)), flags);
        // Re-draw the transfer predictions of every sample outside D.
        auto transfer2 = transfer;
        for (std::size_t i = 0; i < n; ++i) {
            const bool in_d = base[i].first != base[i].second && flags["s" + std::to_string(i)];
            if (!in_d) transfer2[i].second = rng.below(3);
        }
        CHECK(sarcasm_recovery(make_eval_result(records(base)), make_eval_result(records(transfer2)), flags) == rate);
        CHECK(rate >= 0.0);
        CHECK(rate <= 1.0);
    }
}

TEST_CASE("target similarity examples") {
    std::vector<std::vector<double>> set{{1, 2, 0}, {0, 1, 1}};
    auto same = target_similarity({{"A", set}, {"B", set}});
    CHECK(same.scores[0] == Approx(1.0).epsilon(1e-12));
    CHECK(same.scores[1] == Approx(1.0).epsilon(1e-12));

    auto ortho = target_similarity({{"A", {{1, 0}, {3, 0}}}, {"B", {{0, 2}}}});
    CHECK(ortho.scores == std::vector<double>{0.0, 0.0});

    CHECK_THROWS_AS(target_similarity({{"A", set}}), ConfigError);
    CHECK_THROWS_AS(target_similarity({{"A", set}, {"B", {{1, 2}}}}), ConfigError);
}

TEST_CASE("target similarity matches hand-computed cosines") {
    Rng rng(42);
    std::vector<std::pair<std::string, std::vector<std::vector<double>>>> input;
    for (std::string t : {"X", "Y", "Z"}) {
        std::vector<std::vector<double>> vs(2 + rng.below(4), std::vector<double>(4));
        for (auto& v : vs)
            for (auto& e : v) e = rng.uniform(-1, 1);
        input.emplace_back(t, vs);
    }
    std::vector<std::array<double, 4>> means;
    for (auto& [t, vs] : input) {
        std::array<double, 4> m{};
        for (auto& v : vs)
            for (int i = 0; i < 4; ++i) m[i] += v[i] / static_cast<double>(vs.size());
        means.push_back(m);
    }
    auto cos = [&](int a, int b) {
        double d = 0, na = 0, nb = 0;
        for (int i = 0; i < 4; ++i) {
            d += means[a][i] * means[b][i];
            na += means[a][i] * means[a][i];
            nb += means[b][i] * means[b][i];
        }
        return d / std::sqrt(na * nb);
    };
    auto rep = target_similarity(input);
    CHECK(rep.cosine[0][1] == Approx(cos(0, 1)).margin(1e-12));
    CHECK(rep.cosine[0][2] == Approx(cos(0, 2)).margin(1e-12));
    CHECK(rep.cosine[1][2] == Approx(cos(1, 2)).margin(1e-12));
    CHECK(rep.scores[0] == Approx((cos(0, 1) + cos(0, 2)) / 2).margin(1e-12));
    CHECK(rep.scores[2] == Approx((cos(0, 2) + cos(1, 2)) / 2).margin(1e-12));
}

TEST_CASE("similarity matrix is symmetric, unit-diagonal and scale-invariant") {
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<std::string, std::vector<std::vector<double>>>> input;
        const std::size_t targets = 2 + rng.below(4), dim = 1 + rng.below(6);
        for (std::size_t t = 0; t < targets; ++t) {
            std::vector<std::vector<double>> vs(1 + rng.below(5), std::vector<double>(dim));
            for (auto& v : vs)
                for (auto& e : v) e = rng.uniform(0.1, 1);
            input.emplace_back("t" + std::to_string(t), vs);
        }
        auto rep = target_similarity(input);
        const double k = rng.uniform(0.01, 100);
        auto scaled = input;
        for (auto& [t, vs] : scaled)
            for (auto& v : vs)
                for (auto& e : v) e *= k;
        auto rep2 = target_similarity(scaled);
        for (std::size_t i = 0; i < targets; ++i) {
            CHECK(rep.cosine[i][i] == 1.0);
            for (std::size_t j = 0; j < targets; ++j) {
                CHECK(rep.cosine[i][j] == rep.cosine[j][i]);
                CHECK(rep2.cosine[i][j] == Approx(rep.cosine[i][j]).margin(1e-12));
            }
        }
    }
}
