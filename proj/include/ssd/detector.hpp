#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssd/matrix.hpp"
#include "ssd/numerics.hpp"

namespace ssd {

// One cluster's Gaussian: mean, Cholesky factor of the regularized
// covariance, and the eigendecomposition of that same regularized matrix
// (so the eigen-route score identity holds exactly and eigenvalues stay
// positive).
struct ClusterGaussian {
    std::vector<double> mu;
    Matrix chol;
    SymmetricEigen eigen;
    double weight = 0.0;  // fraction of training points in this cluster
};

struct DetectorModel {
    std::vector<ClusterGaussian> clusters;
    std::size_t m = 0;
    std::size_t d = 0;
    bool normalization = true;  // l2 applied at fit; test inputs follow suit
    std::uint64_t fit_seed = 0;
    std::uint64_t source_hash = 0;
};

struct FewShotModel {
    DetectorModel in_model;  // m = 1
    std::vector<double> ood_mean;
    Matrix ood_chol;  // Cholesky of the (regularized) shrunk covariance S_U
    std::size_t k = 0;
    std::size_t n_augment = 1;
    double ood_shrinkage = 0.0;
};

struct Calibration {
    double threshold = 0.0;
    double target_tpr = 0.0;
    std::size_t cal_count = 0;
};

struct ScoreDetail {
    double score = 0.0;
    std::size_t cluster = 0;  // argmin; ties resolve to the lowest index
};

// l2-normalize (default), cluster with k-means (m = 1 skips clustering),
// then per cluster: sample mean/covariance, regularization floor, Cholesky,
// eigendecomposition.
DetectorModel fit(const Matrix& features, std::size_t m, std::uint64_t seed,
                  bool normalize = true);

// min over clusters of the Mahalanobis quadratic form (via Cholesky solve).
double ssd_score(const DetectorModel& model, std::span<const double> z);
ScoreDetail ssd_score_detail(const DetectorModel& model, std::span<const double> z);

// min over clusters of squared euclidean distance to the cluster mean.
double euclid_score(const DetectorModel& model, std::span<const double> z);

// Scores one row per entry; parallel over rows, capped by SSD_THREADS.
std::vector<double> score_batch(const DetectorModel& model, const Matrix& rows);
std::vector<double> euclid_score_batch(const DetectorModel& model, const Matrix& rows);

// Few-shot model: U = each shot plus (n_augment-1) jittered copies, jitter
// std = jitter_scale * per-dimension std of the (normalized) in-features.
// Shots are consumed as given, so they must live in the same space the
// model scores in. `shrinkage` selects Ledoit-Wolf (default) vs plain
// sample covariance for S_U; both get the regularization floor.
FewShotModel fewshot_fit(const Matrix& in_features, const Matrix& ood_shots,
                         std::size_t n_augment, double jitter_scale,
                         std::uint64_t seed, bool normalize = true,
                         bool shrinkage = true);

// maha(z; in) - maha(z; U); may be negative.
double ssd_k_score(const FewShotModel& model, std::span<const double> z);
std::vector<double> ssd_k_score_batch(const FewShotModel& model, const Matrix& rows);

// threshold = ceil(target_tpr * n)-th smallest calibration score.
Calibration calibrate(std::span<const double> cal_scores, double target_tpr);

// outlier iff score strictly exceeds the threshold.
std::vector<std::uint8_t> classify(std::span<const double> scores, const Calibration& cal);

struct EigenReportRow {
    std::size_t index = 0;
    double eigenvalue = 0.0;
    double auroc = 0.0;  // component score (q_j . (z - mu))^2 as the ranker
};

struct EigenReport {
    std::vector<EigenReportRow> rows;
    double auroc_euclid = 0.0;  // aggregate sum_j c_j
    double auroc_maha = 0.0;    // aggregate sum_j c_j / lambda_j
};

// Per-eigenvector discrimination table for a single-cluster model; verifies
// the identity sum_j c_j / lambda_j = ssd_score to 1e-8 relative.
EigenReport eigen_discrimination_report(const DetectorModel& model, const Matrix& in_test,
                                        const Matrix& ood_test);

}  // namespace ssd
