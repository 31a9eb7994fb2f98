#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "metrics_oracle.hpp"
#include "soundsym/errors.hpp"
#include "soundsym/metrics.hpp"

using namespace soundsym;
using namespace oracle;

namespace {

std::vector<double> as_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("auc examples") {
    CHECK(roc_auc({{0, 1, 2, 3}, {0, 0, 1, 1}}) == 1.0);
    CHECK(roc_auc({{0, 1, 2, 3}, {1, 1, 0, 0}}) == 0.0);
    CHECK(roc_auc({{1, 1}, {0, 1}}) == 0.5);
    CHECK_THROWS_AS(roc_auc({{1, 2}, {1, 1}}), DegenerateError);
    CHECK_THROWS_AS(roc_auc({{1, 2}, {1, 2}}), InvalidArgumentError);
    CHECK_THROWS_AS(roc_auc({{1, 2}, {1}}), InvalidArgumentError);
    CHECK_THROWS_AS(roc_auc({{1, NAN}, {0, 1}}), InvalidArgumentError);
}

TEST_CASE("kendall examples") {
    auto t = kendall_tau_b({{0, 1, 2, 3}, {0, 0, 1, 1}});
    CHECK(t.statistic == doctest::Approx(tau_b_pairs(std::vector<double>{0, 1, 2, 3}, std::vector<double>{0, 0, 1, 1})));
    auto anti = kendall_tau_b({{3, 2, 1, 0}, {0, 0, 1, 1}});
    CHECK(anti.statistic == -t.statistic);
    CHECK(anti.p_value == t.p_value);
    std::vector<double> c{1, 1, 1}, v{1, 2, 3};
    CHECK_THROWS_AS(kendall_tau_b(c, v), DegenerateError);
    CHECK_THROWS_AS(kendall_tau_b(v, c), DegenerateError);
}

TEST_CASE("frozen reference values") {
    // Reference values from scipy.stats.kendalltau / ttest_ind(equal_var=False)
    // and sklearn roc_auc_score.
    std::vector<double> x{0.3, 0.1, 0.4, 0.1, 0.5, 0.9, 0.2, 0.6, 0.5, 0.3, 0.8, 0.7};
    std::vector<int> y{1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1};
    CHECK(roc_auc({x, y}) == doctest::Approx(0.8714285714285714).epsilon(1e-14));
    auto t = kendall_tau_b({x, y});
    CHECK(t.statistic == doctest::Approx(0.5536930229999478).epsilon(1e-14));
    CHECK(t.p_value == doctest::Approx(0.03380791878054746).epsilon(1e-10));

    std::vector<double> u{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, w{2, 1, 4, 3, 6, 5, 8, 7, 10, 9};
    auto tw = kendall_tau_b(u, w);
    CHECK(tw.statistic == doctest::Approx(0.7777777777777777).epsilon(1e-14));
    CHECK(tw.p_value == doctest::Approx(0.001745118699528905).epsilon(1e-10));

    std::vector<double> a{1.0, 2.5, 3.1, 4.7, 2.2, 3.3}, b{0.5, 1.1, 0.9, 2.0, 1.4};
    auto r = welch_t_test(a, b);
    CHECK(r.statistic == doctest::Approx(2.8724728716280965).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.02306026993145787).epsilon(1e-9));
    REQUIRE(r.df);
    CHECK(*r.df == doctest::Approx(7.238626204562597).epsilon(1e-12));

    std::vector<double> c{11, 13, 12, 15, 9, 14, 12}, d{13, 14, 16, 12, 15, 17, 13, 14};
    auto r2 = welch_t_test(c, d);
    CHECK(r2.statistic == doctest::Approx(-2.06362885578646).epsilon(1e-12));
    CHECK(r2.p_value == doctest::Approx(0.061635824972284425).epsilon(1e-9));
    CHECK(*r2.df == doctest::Approx(11.865688099283974).epsilon(1e-12));
}

TEST_CASE("auc and tau-b match pair-counting oracles on random instances with ties") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        auto inst = random_instance(rng);
        CHECK(std::abs(roc_auc({inst.scores, inst.labels}) - auc_pairs(inst.scores, inst.labels)) <= 1e-12);
        CHECK(std::abs(kendall_tau_b({inst.scores, inst.labels}).statistic -
                       tau_b_pairs(inst.scores, as_double(inst.labels))) <= 1e-12);
    }
}

TEST_CASE("tau-b on two continuous variables matches the oracle") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> small(0, 5);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> a(30), b(30);
        for (auto& v : a) v = small(rng);
        for (auto& v : b) v = small(rng);
        if (std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; })) continue;
        if (std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; })) continue;
        CHECK(std::abs(kendall_tau_b(a, b).statistic - tau_b_pairs(a, b)) <= 1e-12);
    }
}

TEST_CASE("negated scores give exactly 1 - AUC and exactly -tau") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
        auto inst = random_instance(rng);
        std::vector<double> neg(inst.scores);
        for (double& s : neg) s = -s;
        double auc = roc_auc({inst.scores, inst.labels});
        CHECK(roc_auc({neg, inst.labels}) == 1.0 - auc);
        auto t = kendall_tau_b({inst.scores, inst.labels});
        auto tn = kendall_tau_b({neg, inst.labels});
        CHECK(tn.statistic == -t.statistic);
        CHECK(tn.p_value == t.p_value);
    }
}

TEST_CASE("auc and tau-b are invariant under strictly increasing transforms") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        auto inst = random_instance(rng);
        std::vector<double> moved(inst.scores);
        for (double& s : moved) s = std::exp(3.0 * s) + 7.0;
        CHECK(roc_auc({moved, inst.labels}) == roc_auc({inst.scores, inst.labels}));
        CHECK(kendall_tau_b({moved, inst.labels}).statistic == kendall_tau_b({inst.scores, inst.labels}).statistic);
    }
}

TEST_CASE("shuffled labels give chance AUC on average") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n;
    double total = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        std::vector<double> scores(648);
        for (double& v : scores) v = n(rng);
        std::vector<int> labels(648);
        for (std::size_t i = 0; i < 648; ++i) labels[i] = i < 324 ? 1 : 0;
        std::shuffle(labels.begin(), labels.end(), rng);
        total += roc_auc({scores, labels});
    }
    CHECK(std::abs(total / seeds - 0.5) <= 0.05);
}

TEST_CASE("tau-b p-values agree with a permutation oracle at alpha 0.01") {
    std::mt19937_64 rng(77);
    int agree = 0;
    const int trials = 60;
    for (int i = 0; i < trials; ++i) {
        auto inst = random_instance(rng);
        bool reject = kendall_tau_b({inst.scores, inst.labels}).p_value < 0.01;
        bool oracle_reject = permutation_p_tau(inst.scores, inst.labels, 999, rng) < 0.01;
        agree += reject == oracle_reject;
    }
    // Asymptotic p-values are approximate for small n; require broad agreement.
    CHECK(agree >= trials * 95 / 100);
}

TEST_CASE("percentile rank") {
    std::vector<double> pop{1, 2, 3, 4};
    CHECK(percentile_rank(4, pop) == 87.5);
    CHECK(percentile_rank(0, pop) == 0.0);
    std::vector<double> same{2, 2, 2};
    CHECK(percentile_rank(2, same) == 50.0);
    CHECK(percentile_rank(10, pop) == 100.0);
    CHECK_THROWS_AS(percentile_rank(1, std::vector<double>{}), InvalidArgumentError);

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> d(0, 9);
    std::vector<double> p(50);
    for (auto& v : p) v = d(rng);
    double prev = -1;
    for (double x = -1; x <= 11; x += 0.5) {
        double r = percentile_rank(x, p);
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("delta P kiki bouba") {
    std::vector<double> pop(648);
    for (std::size_t i = 0; i < pop.size(); ++i) pop[i] = static_cast<double>(i);
    double top = delta_p_kb(647, 0, pop);
    CHECK(top > 99.0);
    CHECK(top == doctest::Approx(100.0 * 647.0 / 648.0));
    CHECK(delta_p_kb(3.5, 3.5, pop) == 0.0);
    CHECK(delta_p_kb(0, 647, pop) == -top);
}

TEST_CASE("welch t-test") {
    std::vector<double> xs{1.0, 2.0, 4.0, 7.0};
    auto same = welch_t_test(xs, xs);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));

    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<double> a(100), b(100);
    for (std::size_t i = 0; i < 100; ++i) {
        a[i] = n(rng);
        b[i] = a[i] + 10.0;
    }
    auto r = welch_t_test(a, b);
    CHECK(r.p_value < 1e-10);
    CHECK(permutation_p_mean_diff(a, b, 999, rng) < 0.01);

    std::vector<double> flat{3, 3, 3};
    CHECK_THROWS_AS(welch_t_test(flat, flat), DegenerateError);
    CHECK_THROWS_AS(welch_t_test(std::vector<double>{1}, xs), InvalidArgumentError);
}

}
