#include "soundsym/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "soundsym/errors.hpp"

namespace soundsym {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
    for (double v : xs) {
        if (!std::isfinite(v)) throw InvalidArgumentError(std::string(what) + " contains a non-finite value");
    }
}

void require_labels(const BinaryLabeledScores& data) {
    if (data.scores.size() != data.labels.size()) {
        throw InvalidArgumentError("scores and labels differ in length");
    }
    for (int l : data.labels) {
        if (l != 0 && l != 1) throw InvalidArgumentError("labels must be 0 or 1");
    }
    require_finite(data.scores, "scores");
}

// Sum over groups of equal consecutive values of f(group size).
template <typename Eq, typename F>
double tie_sum(std::size_t n, Eq&& same, F&& f) {
    double total = 0.0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && same(i - 1, i)) {
            ++run;
        } else {
            total += f(static_cast<double>(run));
            run = 1;
        }
    }
    return total;
}

// Counts inversions of `v` while merge-sorting it; equal elements are not inversions.
std::int64_t count_inversions(std::vector<double>& v) {
    std::vector<double> buf(v.size());
    std::int64_t swaps = 0;
    for (std::size_t width = 1; width < v.size(); width *= 2) {
        for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
            std::size_t mid = std::min(lo + width, v.size());
            std::size_t hi = std::min(lo + 2 * width, v.size());
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[i] <= v[j]) {
                    buf[k++] = v[i++];
                } else {
                    swaps += static_cast<std::int64_t>(mid - i);
                    buf[k++] = v[j++];
                }
            }
            while (i < mid) buf[k++] = v[i++];
            while (j < hi) buf[k++] = v[j++];
        }
        std::swap(v, buf);
    }
    return swaps;
}

double sample_variance(std::span<const double> xs, double m) {
    double ss = 0.0;
    for (double v : xs) ss += (v - m) * (v - m);
    return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace

double mean(std::span<const double> xs) {
    if (xs.empty()) throw InvalidArgumentError("mean of an empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double roc_auc(const BinaryLabeledScores& data) {
    require_labels(data);
    const std::size_t n = data.scores.size();
    std::int64_t pos = std::count(data.labels.begin(), data.labels.end(), 1);
    std::int64_t neg = static_cast<std::int64_t>(n) - pos;
    if (pos == 0 || neg == 0) throw DegenerateError("AUC needs both classes present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data.scores[a] < data.scores[b]; });

    // twice_u = sum over positives of 2 * #(negatives below) + #(negatives tied)
    std::int64_t twice_u = 0, neg_below = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        std::int64_t pos_g = 0, neg_g = 0;
        while (j < n && data.scores[order[j]] == data.scores[order[i]]) {
            (data.labels[order[j]] == 1 ? pos_g : neg_g)++;
            ++j;
        }
        twice_u += pos_g * (2 * neg_below + neg_g);
        neg_below += neg_g;
        i = j;
    }
    const std::int64_t twice_pairs = 2 * pos * neg;
    // Snap the smaller side to a multiple of 2^-53 so 1 - m is exact and
    // negating the scores yields exactly 1 - AUC.
    const bool low = twice_u * 2 <= twice_pairs;
    const double minor = static_cast<double>(low ? twice_u : twice_pairs - twice_u) / static_cast<double>(twice_pairs);
    const double m = std::ldexp(std::nearbyint(std::ldexp(minor, 53)), -53);
    return low ? m : 1.0 - m;
}

TestResult kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgumentError("kendall_tau_b inputs differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw InvalidArgumentError("kendall_tau_b needs at least two observations");
    require_finite(x, "x");
    require_finite(y, "y");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    auto pairs = [](double t) { return t * (t - 1) / 2; };
    const double n0 = pairs(static_cast<double>(n));
    const double xtie = tie_sum(n, [&](auto a, auto b) { return x[order[a]] == x[order[b]]; }, pairs);
    const double jointtie = tie_sum(
        n, [&](auto a, auto b) { return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]]; }, pairs);

    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
    // Inversions of y within x-order count discordant pairs; pairs tied in x
    // are already sorted by y and contribute none.
    const auto discordant = static_cast<double>(count_inversions(ys));
    const double ytie = tie_sum(n, [&](auto a, auto b) { return ys[a] == ys[b]; }, pairs);

    if (xtie == n0 || ytie == n0) throw DegenerateError("kendall tau is undefined for a constant variable");

    // concordant - discordant
    const double s = n0 - xtie - ytie + jointtie - 2.0 * discordant;
    TestResult r;
    r.statistic = s / std::sqrt((n0 - xtie) * (n0 - ytie));

    // Tie-adjusted variance of s under independence.
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[order[i]];
    auto sum_over = [&](const std::vector<double>& v, auto f) {
        return tie_sum(n, [&](auto a, auto b) { return v[a] == v[b]; }, f);
    };
    auto t1 = [](double t) { return t * (t - 1); };
    auto t2 = [](double t) { return t * (t - 1) * (t - 2); };
    auto t5 = [](double t) { return t * (t - 1) * (2 * t + 5); };
    const double nd = static_cast<double>(n);
    double var = (t5(nd) - sum_over(xs, t5) - sum_over(ys, t5)) / 18.0 +
                 sum_over(xs, t1) * sum_over(ys, t1) / (2.0 * nd * (nd - 1));
    if (n > 2) var += sum_over(xs, t2) * sum_over(ys, t2) / (9.0 * nd * (nd - 1) * (nd - 2));

    const double z = s / std::sqrt(var);
    r.p_value = std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0);
    return r;
}

TestResult kendall_tau_b(const BinaryLabeledScores& data) {
    require_labels(data);
    std::vector<double> y(data.labels.begin(), data.labels.end());
    return kendall_tau_b(data.scores, y);
}

namespace {

// 2 * #{p < x} + #{p == x}
std::int64_t doubled_rank(double x, std::span<const double> population) {
    if (population.empty()) throw InvalidArgumentError("percentile rank against an empty population");
    require_finite(population, "population");
    std::int64_t less = 0, equal = 0;
    for (double p : population) {
        less += p < x;
        equal += p == x;
    }
    return 2 * less + equal;
}

}  // namespace

double percentile_rank(double x, std::span<const double> population) {
    const std::int64_t r = doubled_rank(x, population);
    return 100.0 * static_cast<double>(r) / (2.0 * static_cast<double>(population.size()));
}

double delta_p_kb(double gamma_kiki, double gamma_bouba, std::span<const double> population) {
    // Differencing the integer ranks first keeps the result exactly antisymmetric.
    const std::int64_t d = doubled_rank(gamma_kiki, population) - doubled_rank(gamma_bouba, population);
    return 100.0 * static_cast<double>(d) / (2.0 * static_cast<double>(population.size()));
}

TestResult welch_t_test(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() < 2 || ys.size() < 2) throw InvalidArgumentError("welch_t_test needs at least two values per sample");
    require_finite(xs, "xs");
    require_finite(ys, "ys");
    const double n1 = static_cast<double>(xs.size()), n2 = static_cast<double>(ys.size());
    const double m1 = mean(xs), m2 = mean(ys);
    const double a = sample_variance(xs, m1) / n1;
    const double b = sample_variance(ys, m2) / n2;
    if (a + b == 0.0) throw DegenerateError("welch_t_test: both samples have zero variance");

    TestResult r;
    r.statistic = (m1 - m2) / std::sqrt(a + b);
    r.df = (a + b) * (a + b) / (a * a / (n1 - 1) + b * b / (n2 - 1));
    boost::math::students_t_distribution<double> dist(*r.df);
    r.p_value = std::clamp(2.0 * boost::math::cdf(dist, -std::abs(r.statistic)), 0.0, 1.0);
    return r;
}

}  // namespace soundsym
