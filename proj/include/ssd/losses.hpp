#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ssd/matrix.hpp"

namespace ssd {

// 2N projected embeddings u_i (rows assumed unit-norm; rows 2t and 2t+1 are
// the two views of point t) with optional per-row class labels and the
// softmax temperature.
struct ContrastiveBatch {
    Matrix embeddings;
    std::optional<std::vector<long long>> labels;  // views of a point share a label
    double temperature = 0.5;
};

// Linear map u = normalize(W z); the desk-scale stand-in for the trained
// feature extractor + projection head.
struct ToyEncoder {
    Matrix weights;  // p x d
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    std::uint64_t seed = 0;
};

struct JitterSpec {
    double std_dev = 0.1;  // absolute per-dimension Gaussian view noise
};

struct TrainResult {
    ToyEncoder encoder;
    std::vector<double> loss_trace;  // one value per step, before that step's update
};

// NT-Xent: mean over rows of -log softmax similarity to the paired view,
// log-sum-exp stabilized. Requires 2N >= 4 (even) and temperature > 0.
double nt_xent_loss(const ContrastiveBatch& batch);

// Supervised contrastive loss: positives are all same-label rows, averaged
// with coefficient 1/(2N_y - 1), shared denominator over all k != i.
// Requires labels; a label appearing on a single row is an error.
double supcon_loss(const ContrastiveBatch& batch);

// Analytic d(nt_xent_loss)/d(embeddings), one row per embedding row.
Matrix nt_xent_grad(const ContrastiveBatch& batch);

// Analytic d(supcon_loss)/d(embeddings).
Matrix supcon_grad(const ContrastiveBatch& batch);

ToyEncoder make_toy_encoder(std::size_t input_dim, std::size_t output_dim,
                            std::uint64_t seed, double init_scale = 1.0);

// Rows of normalize(Z W^T); zero-norm projections pass through as zeros.
Matrix encode(const ToyEncoder& encoder, const Matrix& z);

// Full-batch SGD on W through the normalize(W z) map, minimizing NT-Xent
// (or SupCon when labels are given). The two views per point are jittered
// copies generated once from the seed; every step then descends the same
// fixed objective. Throws if the loss turns non-finite, naming the step.
TrainResult train_toy(const Matrix& data, const JitterSpec& pair_generator,
                      const ToyEncoder& encoder, std::size_t steps, double lr,
                      std::uint64_t seed,
                      const std::optional<std::vector<long long>>& labels = std::nullopt,
                      double temperature = 1.0);

}  // namespace ssd
