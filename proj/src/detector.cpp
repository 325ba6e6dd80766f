#include "ssd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "ssd/clustering.hpp"
#include "ssd/io.hpp"
#include "ssd/metrics.hpp"
#include "ssd/rng.hpp"

namespace ssd {

namespace {

std::vector<double> maybe_normalize(const DetectorModel& model, std::span<const double> z) {
    if (z.size() != model.d) throw std::invalid_argument("score: dimension mismatch");
    std::vector<double> out(z.begin(), z.end());
    if (model.normalization) {
        double norm2 = 0.0;
        for (double v : out) norm2 += v * v;
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& v : out) v *= inv;
        }
    }
    return out;
}

ClusterGaussian make_cluster(const Matrix& points, double weight) {
    CovarianceEstimate est = sample_mean_cov(points);
    ClusterGaussian g;
    g.mu = std::move(est.mean);
    Matrix cov = regularize_spd(est.covariance);
    g.chol = cholesky(cov);
    g.eigen = eig_sym(cov);
    g.weight = weight;
    return g;
}

std::size_t thread_budget(std::size_t n) {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SSD_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) hw = static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::min({hw, n, std::size_t{64}}));
}

template <class Fn>
std::vector<double> parallel_rows(const Matrix& rows, Fn&& score_one) {
    std::vector<double> out(rows.rows);
    const std::size_t nt = thread_budget(rows.rows);
    if (nt <= 1) {
        for (std::size_t i = 0; i < rows.rows; ++i) out[i] = score_one(rows.row(i));
        return out;
    }
    std::vector<std::thread> workers;
    workers.reserve(nt);
    const std::size_t chunk = (rows.rows + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(rows.rows, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) out[i] = score_one(rows.row(i));
        });
    }
    for (auto& w : workers) w.join();
    return out;
}

}  // namespace

DetectorModel fit(const Matrix& features, std::size_t m, std::uint64_t seed,
                  bool normalize) {
    if (features.rows == 0) throw std::invalid_argument("fit: no features");
    if (m == 0) throw std::invalid_argument("fit: m must be >= 1");

    DetectorModel model;
    model.m = m;
    model.d = features.cols;
    model.normalization = normalize;
    model.fit_seed = seed;
    model.source_hash = feature_hash(features);

    Matrix z = normalize ? l2_normalize_rows(features).features : features;

    if (m == 1) {
        model.clusters.push_back(make_cluster(z, 1.0));
        return model;
    }

    const KMeansModel km = kmeans_fit(z, m, seed);
    std::vector<std::size_t> counts(m, 0);
    for (std::size_t a : km.assignments) ++counts[a];
    for (std::size_t c = 0; c < m; ++c) {
        Matrix pts(counts[c], z.cols);
        std::size_t r = 0;
        for (std::size_t i = 0; i < z.rows; ++i) {
            if (km.assignments[i] != c) continue;
            std::copy(z.row(i).begin(), z.row(i).end(), pts.row(r).begin());
            ++r;
        }
        model.clusters.push_back(
            make_cluster(pts, static_cast<double>(counts[c]) / static_cast<double>(z.rows)));
    }
    return model;
}

ScoreDetail ssd_score_detail(const DetectorModel& model, std::span<const double> z) {
    const std::vector<double> x = maybe_normalize(model, z);
    ScoreDetail best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t c = 0; c < model.clusters.size(); ++c) {
        const auto& g = model.clusters[c];
        const double q = maha_quadform(g.chol, g.mu, x);
        if (q < best.score) best = {q, c};
    }
    return best;
}

double ssd_score(const DetectorModel& model, std::span<const double> z) {
    return ssd_score_detail(model, z).score;
}

double euclid_score(const DetectorModel& model, std::span<const double> z) {
    const std::vector<double> x = maybe_normalize(model, z);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : model.clusters) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double v = x[j] - g.mu[j];
            s += v * v;
        }
        best = std::min(best, s);
    }
    return best;
}

std::vector<double> score_batch(const DetectorModel& model, const Matrix& rows) {
    return parallel_rows(rows, [&](std::span<const double> r) { return ssd_score(model, r); });
}

std::vector<double> euclid_score_batch(const DetectorModel& model, const Matrix& rows) {
    return parallel_rows(rows,
                         [&](std::span<const double> r) { return euclid_score(model, r); });
}

FewShotModel fewshot_fit(const Matrix& in_features, const Matrix& ood_shots,
                         std::size_t n_augment, double jitter_scale, std::uint64_t seed,
                         bool normalize, bool shrinkage) {
    if (ood_shots.rows == 0) throw std::invalid_argument("fewshot_fit: need at least one shot");
    if (n_augment == 0) throw std::invalid_argument("fewshot_fit: n_augment must be >= 1");
    if (ood_shots.cols != in_features.cols)
        throw std::invalid_argument("fewshot_fit: shot dimension mismatch");

    FewShotModel fs;
    fs.in_model = fit(in_features, 1, seed, normalize);
    fs.k = ood_shots.rows;
    fs.n_augment = n_augment;

    // jitter std per dimension, taken from the features the model actually fit
    const Matrix z_in =
        normalize ? l2_normalize_rows(in_features).features : in_features;
    const CovarianceEstimate in_est = sample_mean_cov(z_in);
    const std::size_t d = in_features.cols;
    std::vector<double> jitter_sd(d);
    for (std::size_t j = 0; j < d; ++j)
        jitter_sd[j] = jitter_scale * std::sqrt(in_est.covariance(j, j));

    Matrix u(fs.k * n_augment, d);
    Rng rng(seed);
    std::size_t r = 0;
    for (std::size_t s = 0; s < fs.k; ++s) {
        std::copy(ood_shots.row(s).begin(), ood_shots.row(s).end(), u.row(r).begin());
        ++r;
        for (std::size_t a = 1; a < n_augment; ++a, ++r) {
            auto out = u.row(r);
            auto shot = ood_shots.row(s);
            for (std::size_t j = 0; j < d; ++j) out[j] = shot[j] + jitter_sd[j] * rng.normal();
        }
    }

    CovarianceEstimate ood_est = shrinkage ? ledoit_wolf(u) : sample_mean_cov(u);
    fs.ood_mean = std::move(ood_est.mean);
    fs.ood_chol = cholesky(regularize_spd(ood_est.covariance));
    fs.ood_shrinkage = ood_est.shrinkage_intensity;
    return fs;
}

double ssd_k_score(const FewShotModel& model, std::span<const double> z) {
    const std::vector<double> x = maybe_normalize(model.in_model, z);
    const auto& g = model.in_model.clusters.front();
    return maha_quadform(g.chol, g.mu, x) - maha_quadform(model.ood_chol, model.ood_mean, x);
}

std::vector<double> ssd_k_score_batch(const FewShotModel& model, const Matrix& rows) {
    return parallel_rows(rows,
                         [&](std::span<const double> r) { return ssd_k_score(model, r); });
}

Calibration calibrate(std::span<const double> cal_scores, double target_tpr) {
    if (cal_scores.empty()) throw std::invalid_argument("calibrate: no scores");
    if (!(target_tpr > 0.0) || target_tpr > 1.0)
        throw std::invalid_argument("calibrate: target_tpr must be in (0,1]");
    const std::size_t n = cal_scores.size();
    // epsilon guards fp excess: 0.95*20 must select the 19th order statistic
    const double raw = std::ceil(target_tpr * static_cast<double>(n) - 1e-9);
    const std::size_t r =
        std::min<std::size_t>(n, std::max<std::size_t>(1, static_cast<std::size_t>(raw)));
    std::vector<double> sorted(cal_scores.begin(), cal_scores.end());
    std::nth_element(sorted.begin(), sorted.begin() + (r - 1), sorted.end());
    return Calibration{sorted[r - 1], target_tpr, n};
}

std::vector<std::uint8_t> classify(std::span<const double> scores, const Calibration& cal) {
    std::vector<std::uint8_t> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        out[i] = scores[i] > cal.threshold ? 1 : 0;
    return out;
}

EigenReport eigen_discrimination_report(const DetectorModel& model, const Matrix& in_test,
                                        const Matrix& ood_test) {
    if (model.m != 1)
        throw std::invalid_argument("eigen_discrimination_report: requires m = 1");
    const auto& g = model.clusters.front();
    const std::size_t d = model.d;

    // component scores c_j = (q_j . (z - mu))^2 for every test point
    auto components = [&](const Matrix& pts) {
        Matrix c(pts.rows, d);
        for (std::size_t i = 0; i < pts.rows; ++i) {
            const std::vector<double> x = maybe_normalize(model, pts.row(i));
            for (std::size_t j = 0; j < d; ++j) {
                double dot = 0.0;
                for (std::size_t a = 0; a < d; ++a)
                    dot += g.eigen.eigenvectors(a, j) * (x[a] - g.mu[a]);
                c(i, j) = dot * dot;
            }
        }
        return c;
    };
    const Matrix c_in = components(in_test);
    const Matrix c_ood = components(ood_test);

    EigenReport report;
    std::vector<double> in_col(in_test.rows), ood_col(ood_test.rows);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < in_test.rows; ++i) in_col[i] = c_in(i, j);
        for (std::size_t i = 0; i < ood_test.rows; ++i) ood_col[i] = c_ood(i, j);
        report.rows.push_back(
            {j, g.eigen.eigenvalues[j], auroc(make_labeled(in_col, ood_col))});
    }

    auto aggregate = [&](const Matrix& c, const Matrix& pts, bool scaled) {
        std::vector<double> s(c.rows, 0.0);
        for (std::size_t i = 0; i < c.rows; ++i) {
            for (std::size_t j = 0; j < d; ++j)
                s[i] += scaled ? c(i, j) / g.eigen.eigenvalues[j] : c(i, j);
            if (scaled) {
                // the scaled aggregate must reproduce ssd_score (eigen identity)
                const double ref = ssd_score(model, pts.row(i));
                const double denom = std::max(std::abs(ref), 1e-300);
                if (std::abs(s[i] - ref) > 1e-8 * std::max(1.0, denom))
                    throw std::logic_error(
                        "eigen_discrimination_report: eigen identity violated");
            }
        }
        return s;
    };
    const std::vector<double> e_in = aggregate(c_in, in_test, false);
    const std::vector<double> e_ood = aggregate(c_ood, ood_test, false);
    const std::vector<double> m_in = aggregate(c_in, in_test, true);
    const std::vector<double> m_ood = aggregate(c_ood, ood_test, true);
    report.auroc_euclid = auroc(make_labeled(e_in, e_ood));
    report.auroc_maha = auroc(make_labeled(m_in, m_ood));
    return report;
}

}  // namespace ssd
