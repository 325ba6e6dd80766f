#include "ssd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ssd {

namespace {

void check_two_class(const LabeledScores& data, std::size_t& n_in, std::size_t& n_ood) {
    if (data.scores.size() != data.is_ood.size())
        throw std::invalid_argument("metrics: scores/labels length mismatch");
    n_ood = 0;
    for (auto f : data.is_ood) n_ood += f ? 1 : 0;
    n_in = data.scores.size() - n_ood;
    if (n_ood == 0 || n_in == 0)
        throw std::invalid_argument("metrics: need at least one positive and one negative");
}

}  // namespace

LabeledScores make_labeled(std::span<const double> in_scores,
                           std::span<const double> ood_scores) {
    LabeledScores out;
    out.scores.reserve(in_scores.size() + ood_scores.size());
    out.is_ood.reserve(in_scores.size() + ood_scores.size());
    for (double s : in_scores) {
        out.scores.push_back(s);
        out.is_ood.push_back(0);
    }
    for (double s : ood_scores) {
        out.scores.push_back(s);
        out.is_ood.push_back(1);
    }
    return out;
}

double auroc(const LabeledScores& data) {
    std::size_t n_in, n_ood;
    check_two_class(data, n_in, n_ood);
    const std::size_t n = data.scores.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.scores[a] < data.scores[b];
    });

    // average ranks over tie groups; rank sums of halves stay exact in double
    double rank_sum_ood = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && data.scores[order[j]] == data.scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (data.is_ood[order[k]]) rank_sum_ood += avg_rank;
        }
        i = j;
    }
    const double u = rank_sum_ood -
                     0.5 * static_cast<double>(n_ood) * static_cast<double>(n_ood + 1);
    return u / (static_cast<double>(n_ood) * static_cast<double>(n_in));
}

double aupr(const LabeledScores& data) {
    if (data.scores.size() != data.is_ood.size())
        throw std::invalid_argument("metrics: scores/labels length mismatch");
    std::size_t n_ood = 0;
    for (auto f : data.is_ood) n_ood += f ? 1 : 0;
    if (n_ood == 0) throw std::invalid_argument("aupr: no positives");
    const std::size_t n = data.scores.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.scores[a] > data.scores[b];
    });

    // descending sweep; tied scores form one threshold step, precision taken
    // after the whole group (average-precision convention)
    double area = 0.0;
    std::size_t tp = 0, fp = 0;
    double prev_recall = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && data.scores[order[j]] == data.scores[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) {
            if (data.is_ood[order[k]]) ++tp;
            else ++fp;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_ood);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return area;
}

double fpr_at_tpr(const LabeledScores& data, double tpr) {
    std::size_t n_in, n_ood;
    check_two_class(data, n_in, n_ood);
    if (!(tpr > 0.0) || tpr > 1.0)
        throw std::invalid_argument("fpr_at_tpr: tpr must be in (0,1]");

    std::vector<double> ood;
    ood.reserve(n_ood);
    std::vector<double> in;
    in.reserve(n_in);
    for (std::size_t i = 0; i < data.scores.size(); ++i) {
        (data.is_ood[i] ? ood : in).push_back(data.scores[i]);
    }

    // r-th largest OOD score; epsilon guards fp excess in tpr*n products
    const double raw = std::ceil(tpr * static_cast<double>(n_ood) - 1e-9);
    const std::size_t r =
        std::min<std::size_t>(n_ood, std::max<std::size_t>(1, static_cast<std::size_t>(raw)));
    std::nth_element(ood.begin(), ood.begin() + (r - 1), ood.end(), std::greater<>());
    const double s_r = ood[r - 1];

    std::size_t fp = 0;
    for (double s : in) fp += (s >= s_r) ? 1 : 0;
    return static_cast<double>(fp) / static_cast<double>(n_in);
}

EvalReport evaluate_scores(std::span<const double> in_scores,
                           std::span<const double> ood_scores, double tpr_target) {
    const LabeledScores data = make_labeled(in_scores, ood_scores);
    EvalReport r;
    r.auroc = auroc(data);
    r.aupr = aupr(data);
    r.fpr_at_tpr = fpr_at_tpr(data, tpr_target);
    r.tpr_target = tpr_target;
    r.n_in = in_scores.size();
    r.n_ood = ood_scores.size();
    return r;
}

std::string eval_report_tsv_header() {
    return "auroc\taupr\tfpr_at_tpr\ttpr_target\tn_in\tn_ood";
}

std::string eval_report_tsv_line(const EvalReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.auroc << '\t' << r.aupr << '\t' << r.fpr_at_tpr << '\t' << r.tpr_target
       << '\t' << r.n_in << '\t' << r.n_ood;
    return os.str();
}

}  // namespace ssd
