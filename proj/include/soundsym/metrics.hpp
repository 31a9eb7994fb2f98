#pragma once

#include <optional>
#include <span>
#include <vector>

namespace soundsym {

/// Scores with binary ground truth (1 = sharp, 0 = round).
struct BinaryLabeledScores {
    std::vector<double> scores;
    std::vector<int> labels;
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<double> df;
};

/// Mann-Whitney AUC with ties counted as half. The value is computed from an
/// exact doubled pair count; the side at or below 0.5 is a direct quotient and
/// the other side is its complement, so negating the scores maps the result to
/// exactly 1 - AUC.
double roc_auc(const BinaryLabeledScores& data);

/// Tie-corrected Kendall tau-b (O(n log n)) with a two-sided p-value from the
/// normal approximation with tie-adjusted variance. Approximate for n < 20.
TestResult kendall_tau_b(std::span<const double> x, std::span<const double> y);
TestResult kendall_tau_b(const BinaryLabeledScores& data);

/// 100 * (#{p < x} + #{p == x} / 2) / N.
double percentile_rank(double x, std::span<const double> population);

/// Percentile of gamma("kiki") minus percentile of gamma("bouba"), in points.
double delta_p_kb(double gamma_kiki, double gamma_bouba, std::span<const double> population);

/// Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom.
TestResult welch_t_test(std::span<const double> xs, std::span<const double> ys);

double mean(std::span<const double> xs);

}  // namespace soundsym
