#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ssd {

// Scores with outlier labels; OOD samples are the positive class throughout.
struct LabeledScores {
    std::vector<double> scores;
    std::vector<std::uint8_t> is_ood;  // 1 = outlier (positive)
};

struct EvalReport {
    double auroc = 0.0;
    double aupr = 0.0;
    double fpr_at_tpr = 0.0;
    double tpr_target = 0.0;
    std::size_t n_in = 0;
    std::size_t n_ood = 0;
};

LabeledScores make_labeled(std::span<const double> in_scores,
                           std::span<const double> ood_scores);

// Rank (Mann-Whitney) AUROC with 0.5 credit per tied pair. Requires at
// least one positive and one negative.
double auroc(const LabeledScores& data);

// Area under the precision-recall curve, positives = OOD, step-wise
// interpolation (precision held to the right between recall points).
double aupr(const LabeledScores& data);

// FPR at the threshold just below the r-th largest OOD score,
// r = ceil(tpr * n_ood); in-scores >= that score count as false positives
// (matches the strict-greater classify rule).
double fpr_at_tpr(const LabeledScores& data, double tpr);

EvalReport evaluate_scores(std::span<const double> in_scores,
                           std::span<const double> ood_scores, double tpr_target);

std::string eval_report_tsv_header();
std::string eval_report_tsv_line(const EvalReport& r);

}  // namespace ssd
