#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ssd/metrics.hpp"
#include "ssd/rng.hpp"

using namespace ssd;
using namespace test_support;

namespace {

LabeledScores labeled(const std::vector<double>& in_scores,
                      const std::vector<double>& ood_scores) {
    return make_labeled(in_scores, ood_scores);
}

// random score vectors with heavy ties (quantized to a few levels)
void random_tied_scores(std::uint64_t seed, std::vector<double>& in_scores,
                        std::vector<double>& ood_scores) {
    ssd::Rng rng(seed);
    const std::size_t n_in = 1 + rng.index(120);
    const std::size_t n_ood = 1 + rng.index(80);
    const std::size_t levels = 1 + rng.index(12);
    in_scores.resize(n_in);
    ood_scores.resize(n_ood);
    for (auto& v : in_scores)
        v = static_cast<double>(rng.index(levels)) * 0.5;
    for (auto& v : ood_scores)
        v = static_cast<double>(rng.index(levels)) * 0.5 + 0.5 * rng.index(2);
}

}  // namespace

TEST_CASE("auroc hand cases") {
    SUBCASE("perfect separation") {
        CHECK(auroc(labeled({1, 2, 3}, {4, 5})) == 1.0);
    }
    SUBCASE("all scores identical") {
        CHECK(auroc(labeled({2, 2, 2}, {2, 2})) == 0.5);
    }
    SUBCASE("mixed 5-point case") {
        CHECK(auroc(labeled({1, 2, 3}, {2.5, 4})) ==
              doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    }
    SUBCASE("single-class input throws") {
        CHECK_THROWS_AS((void)auroc(labeled({}, {1, 2})), std::invalid_argument);
        CHECK_THROWS_AS((void)auroc(labeled({1, 2}, {})), std::invalid_argument);
    }
}

TEST_CASE("auroc equals the pairwise oracle with ties") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        std::vector<double> in_scores, ood_scores;
        random_tied_scores(seed, in_scores, ood_scores);
        const double got = auroc(labeled(in_scores, ood_scores));
        const double expect = auroc_pairwise_oracle(in_scores, ood_scores);
        CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("auroc symmetry and invariance properties") {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        std::vector<double> in_scores, ood_scores;
        random_tied_scores(seed, in_scores, ood_scores);

        // negating scores reverses the ranking; the two rank sums are exact,
        // only the final divisions round, so the sum sits within one ulp of 1
        std::vector<double> neg_in(in_scores), neg_ood(ood_scores);
        for (auto& v : neg_in) v = -v;
        for (auto& v : neg_ood) v = -v;
        CHECK(auroc(labeled(in_scores, ood_scores)) + auroc(labeled(neg_in, neg_ood)) ==
              doctest::Approx(1.0).epsilon(1e-15));

        // strictly increasing transform preserves ranks
        auto squash = [](double v) { return std::atan(1.7 * v) + 3.0 * v; };
        std::vector<double> t_in(in_scores), t_ood(ood_scores);
        for (auto& v : t_in) v = squash(v);
        for (auto& v : t_ood) v = squash(v);
        CHECK(auroc(labeled(t_in, t_ood)) ==
              doctest::Approx(auroc(labeled(in_scores, ood_scores))).epsilon(1e-12));
    }
}

TEST_CASE("aupr hand cases") {
    SUBCASE("perfect separation") {
        CHECK(aupr(labeled({1, 2, 3}, {4, 5})) == 1.0);
    }
    SUBCASE("all ties collapse to prevalence") {
        CHECK(aupr(labeled({1, 1, 1}, {1, 1})) == doctest::Approx(0.4).epsilon(1e-15));
    }
    SUBCASE("mixed case matches the threshold-enumeration oracle") {
        const std::vector<double> in_scores{1, 2, 3}, ood_scores{2.5, 4};
        CHECK(aupr(labeled(in_scores, ood_scores)) ==
              doctest::Approx(aupr_enum_oracle(in_scores, ood_scores)).epsilon(1e-15));
        CHECK(aupr(labeled(in_scores, ood_scores)) ==
              doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    }
    SUBCASE("no positives throws") {
        CHECK_THROWS_AS((void)aupr(labeled({1, 2}, {})), std::invalid_argument);
    }
}

TEST_CASE("aupr equals the enumeration oracle on tied batches") {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        std::vector<double> in_scores, ood_scores;
        random_tied_scores(seed, in_scores, ood_scores);
        CHECK(aupr(labeled(in_scores, ood_scores)) ==
              doctest::Approx(aupr_enum_oracle(in_scores, ood_scores)).epsilon(1e-12));
    }
}

TEST_CASE("aupr stays above prevalence when a positive ranks first") {
    for (std::uint64_t seed = 300; seed < 310; ++seed) {
        std::vector<double> in_scores, ood_scores;
        random_tied_scores(seed, in_scores, ood_scores);
        double max_in = -1e300, max_ood = -1e300;
        for (double v : in_scores) max_in = std::max(max_in, v);
        for (double v : ood_scores) max_ood = std::max(max_ood, v);
        if (max_ood <= max_in) continue;  // positive must rank strictly first
        const double prevalence =
            static_cast<double>(ood_scores.size()) /
            static_cast<double>(ood_scores.size() + in_scores.size());
        CHECK(aupr(labeled(in_scores, ood_scores)) >= prevalence);
    }
}

TEST_CASE("fpr_at_tpr hand cases") {
    SUBCASE("perfect separation") {
        CHECK(fpr_at_tpr(labeled({1, 2, 3}, {4, 5}), 0.95) == 0.0);
    }
    SUBCASE("five-point enumeration") {
        CHECK(fpr_at_tpr(labeled({1, 2, 3, 4, 5}, {3.5, 4.5, 6, 7, 8}), 0.8) ==
              doctest::Approx(0.2).epsilon(1e-15));
    }
    SUBCASE("identically distributed scores give fpr close to tpr") {
        ssd::Rng rng(4);
        std::vector<double> in_scores(2000), ood_scores(2000);
        for (auto& v : in_scores) v = rng.normal();
        for (auto& v : ood_scores) v = rng.normal();
        const double got = fpr_at_tpr(labeled(in_scores, ood_scores), 0.95);
        CHECK(std::abs(got - 0.95) < 3.0 / std::sqrt(2000.0));
    }
    SUBCASE("monotone in the target") {
        for (std::uint64_t seed = 400; seed < 406; ++seed) {
            std::vector<double> in_scores, ood_scores;
            random_tied_scores(seed, in_scores, ood_scores);
            const auto data = labeled(in_scores, ood_scores);
            double prev = -1.0;
            for (double t : {0.2, 0.5, 0.8, 0.95, 1.0}) {
                const double v = fpr_at_tpr(data, t);
                CHECK(v >= prev);
                prev = v;
            }
        }
    }
    SUBCASE("invalid target throws") {
        CHECK_THROWS_AS((void)fpr_at_tpr(labeled({1}, {2}), 0.0), std::invalid_argument);
        CHECK_THROWS_AS((void)fpr_at_tpr(labeled({1}, {2}), 1.5), std::invalid_argument);
    }
}

TEST_CASE("evaluate_scores bundles the three metrics") {
    const std::vector<double> in_scores{1, 2, 3, 4, 5}, ood_scores{3.5, 4.5, 6, 7, 8};
    const EvalReport r = evaluate_scores(in_scores, ood_scores, 0.8);
    const auto data = labeled(in_scores, ood_scores);
    CHECK(r.auroc == auroc(data));
    CHECK(r.aupr == aupr(data));
    CHECK(r.fpr_at_tpr == fpr_at_tpr(data, 0.8));
    CHECK(r.tpr_target == 0.8);
    CHECK(r.n_in == 5);
    CHECK(r.n_ood == 5);
    CHECK(r.auroc >= 0.0);
    CHECK(r.auroc <= 1.0);
    CHECK(r.aupr >= 0.0);
    CHECK(r.aupr <= 1.0);
    CHECK(r.fpr_at_tpr >= 0.0);
    CHECK(r.fpr_at_tpr <= 1.0);

    const std::string header = eval_report_tsv_header();
    const std::string line = eval_report_tsv_line(r);
    CHECK(header.find("auroc") != std::string::npos);
    CHECK(line.find('\t') != std::string::npos);
}
