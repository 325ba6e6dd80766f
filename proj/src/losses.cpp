#include "ssd/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ssd/rng.hpp"

namespace ssd {

namespace {

void check_batch(const ContrastiveBatch& batch, bool need_labels) {
    const std::size_t n = batch.embeddings.rows;
    if (n < 4 || n % 2 != 0)
        throw std::invalid_argument("contrastive batch needs an even row count >= 4");
    if (!(batch.temperature > 0.0))
        throw std::invalid_argument("temperature must be positive");
    if (need_labels) {
        if (!batch.labels) throw std::invalid_argument("supcon: labels required");
        if (batch.labels->size() != n)
            throw std::invalid_argument("supcon: label count mismatch");
    }
}

// logits s_ik = u_i . u_k / tau for k != i, row-stable softmax and lse
struct SoftmaxRows {
    Matrix p;                 // p_ik, zero on the diagonal
    std::vector<double> lse;  // log sum_{k != i} exp(s_ik)
    Matrix s;                 // raw logits
};

SoftmaxRows softmax_rows(const ContrastiveBatch& batch) {
    const Matrix& u = batch.embeddings;
    const std::size_t n = u.rows, p = u.cols;
    const double inv_tau = 1.0 / batch.temperature;

    SoftmaxRows out;
    out.s = Matrix(n, n);
    out.p = Matrix(n, n);
    out.lse.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto ui = u.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            auto uk = u.row(k);
            double dot = 0.0;
            for (std::size_t j = 0; j < p; ++j) dot += ui[j] * uk[j];
            out.s(i, k) = dot * inv_tau;
            mx = std::max(mx, out.s(i, k));
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            sum += std::exp(out.s(i, k) - mx);
        }
        out.lse[i] = mx + std::log(sum);
        const double inv_sum = 1.0 / sum;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            out.p(i, k) = std::exp(out.s(i, k) - mx) * inv_sum;
        }
    }
    return out;
}

}  // namespace

double nt_xent_loss(const ContrastiveBatch& batch) {
    check_batch(batch, false);
    const SoftmaxRows sm = softmax_rows(batch);
    const std::size_t n = batch.embeddings.rows;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i ^ 1;  // paired view
        total += -sm.s(i, j) + sm.lse[i];
    }
    return total / static_cast<double>(n);
}

double supcon_loss(const ContrastiveBatch& batch) {
    check_batch(batch, true);
    const SoftmaxRows sm = softmax_rows(batch);
    const std::size_t n = batch.embeddings.rows;
    const auto& y = *batch.labels;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double inner = 0.0;
        std::size_t positives = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i || y[k] != y[i]) continue;
            inner += -sm.s(i, k) + sm.lse[i];
            ++positives;
        }
        if (positives == 0)
            throw std::invalid_argument("supcon: label " + std::to_string(y[i]) +
                                        " appears only once in the batch");
        total += inner / static_cast<double>(positives);
    }
    return total / static_cast<double>(n);
}

Matrix nt_xent_grad(const ContrastiveBatch& batch) {
    check_batch(batch, false);
    const SoftmaxRows sm = softmax_rows(batch);
    const Matrix& u = batch.embeddings;
    const std::size_t n = u.rows, p = u.cols;
    const double scale = 1.0 / (static_cast<double>(n) * batch.temperature);

    // dL/du_a = scale * ( -2 u_{pair(a)} + sum_{k != a} (p_ak + p_ka) u_k )
    Matrix g(n, p);
    for (std::size_t a = 0; a < n; ++a) {
        auto ga = g.row(a);
        for (std::size_t k = 0; k < n; ++k) {
            if (k == a) continue;
            const double w = sm.p(a, k) + sm.p(k, a);
            auto uk = u.row(k);
            for (std::size_t j = 0; j < p; ++j) ga[j] += w * uk[j];
        }
        auto upair = u.row(a ^ 1);
        for (std::size_t j = 0; j < p; ++j) ga[j] = scale * (ga[j] - 2.0 * upair[j]);
    }
    return g;
}

Matrix supcon_grad(const ContrastiveBatch& batch) {
    check_batch(batch, true);
    const SoftmaxRows sm = softmax_rows(batch);
    const Matrix& u = batch.embeddings;
    const auto& y = *batch.labels;
    const std::size_t n = u.rows, p = u.cols;
    const double scale = 1.0 / (static_cast<double>(n) * batch.temperature);

    // same algebra as nt_xent_grad with the positive set generalized:
    // dL/du_a = scale * ( -(2/|P_a|) sum_{q in P_a} u_q + sum_{k != a} (p_ak + p_ka) u_k )
    Matrix g(n, p);
    for (std::size_t a = 0; a < n; ++a) {
        auto ga = g.row(a);
        std::size_t positives = 0;
        std::vector<double> pos_sum(p, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (k == a) continue;
            const double w = sm.p(a, k) + sm.p(k, a);
            auto uk = u.row(k);
            for (std::size_t j = 0; j < p; ++j) ga[j] += w * uk[j];
            if (y[k] == y[a]) {
                ++positives;
                for (std::size_t j = 0; j < p; ++j) pos_sum[j] += uk[j];
            }
        }
        if (positives == 0)
            throw std::invalid_argument("supcon: label " + std::to_string(y[a]) +
                                        " appears only once in the batch");
        const double cw = 2.0 / static_cast<double>(positives);
        for (std::size_t j = 0; j < p; ++j) ga[j] = scale * (ga[j] - cw * pos_sum[j]);
    }
    return g;
}

ToyEncoder make_toy_encoder(std::size_t input_dim, std::size_t output_dim,
                            std::uint64_t seed, double init_scale) {
    ToyEncoder enc;
    enc.input_dim = input_dim;
    enc.output_dim = output_dim;
    enc.seed = seed;
    enc.weights = Matrix(output_dim, input_dim);
    Rng rng(seed);
    for (double& w : enc.weights.data) w = init_scale * rng.normal();
    return enc;
}

Matrix encode(const ToyEncoder& encoder, const Matrix& z) {
    if (z.cols != encoder.input_dim) throw std::invalid_argument("encode: dimension mismatch");
    const std::size_t n = z.rows, p = encoder.output_dim, d = encoder.input_dim;
    Matrix u(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        auto zi = z.row(i);
        auto ui = u.row(i);
        double norm2 = 0.0;
        for (std::size_t a = 0; a < p; ++a) {
            auto wrow = encoder.weights.row(a);
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) dot += wrow[j] * zi[j];
            ui[a] = dot;
            norm2 += dot * dot;
        }
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t a = 0; a < p; ++a) ui[a] *= inv;
        }
    }
    return u;
}

TrainResult train_toy(const Matrix& data, const JitterSpec& pair_generator,
                      const ToyEncoder& encoder, std::size_t steps, double lr,
                      std::uint64_t seed,
                      const std::optional<std::vector<long long>>& labels,
                      double temperature) {
    if (steps == 0) throw std::invalid_argument("train_toy: steps must be >= 1");
    if (data.cols != encoder.input_dim)
        throw std::invalid_argument("train_toy: data/encoder dimension mismatch");
    if (labels && labels->size() != data.rows)
        throw std::invalid_argument("train_toy: label count mismatch");

    const std::size_t n = data.rows, d = data.cols, p = encoder.output_dim;
    Rng rng(seed);

    // two jittered views per point, fixed for the whole run
    Matrix views(2 * n, d);
    std::optional<std::vector<long long>> view_labels;
    if (labels) view_labels.emplace(2 * n);
    for (std::size_t t = 0; t < n; ++t) {
        auto zt = data.row(t);
        for (int v = 0; v < 2; ++v) {
            auto out = views.row(2 * t + v);
            for (std::size_t j = 0; j < d; ++j)
                out[j] = zt[j] + pair_generator.std_dev * rng.normal();
            if (labels) (*view_labels)[2 * t + v] = (*labels)[t];
        }
    }

    TrainResult result;
    result.encoder = encoder;
    result.loss_trace.reserve(steps);
    Matrix& w = result.encoder.weights;

    for (std::size_t step = 0; step < steps; ++step) {
        // forward: v = W z, u = v / ||v||
        Matrix v(2 * n, p);
        std::vector<double> norms(2 * n);
        ContrastiveBatch batch;
        batch.embeddings = Matrix(2 * n, p);
        batch.labels = view_labels;
        batch.temperature = temperature;
        for (std::size_t i = 0; i < 2 * n; ++i) {
            auto zi = views.row(i);
            auto vi = v.row(i);
            double norm2 = 0.0;
            for (std::size_t a = 0; a < p; ++a) {
                double dot = 0.0;
                const double* wrow = &w(a, 0);
                for (std::size_t j = 0; j < d; ++j) dot += wrow[j] * zi[j];
                vi[a] = dot;
                norm2 += dot * dot;
            }
            norms[i] = std::sqrt(norm2);
            auto ui = batch.embeddings.row(i);
            const double inv = norms[i] > 0.0 ? 1.0 / norms[i] : 0.0;
            for (std::size_t a = 0; a < p; ++a) ui[a] = vi[a] * inv;
        }

        const double loss = labels ? supcon_loss(batch) : nt_xent_loss(batch);
        if (!std::isfinite(loss))
            throw std::runtime_error("train_toy: loss diverged at step " +
                                     std::to_string(step));
        result.loss_trace.push_back(loss);

        const Matrix gu = labels ? supcon_grad(batch) : nt_xent_grad(batch);

        // chain through the normalization: g_v = (g_u - (g_u . u) u) / ||v||,
        // then dW += g_v z^T
        Matrix dw(p, d);
        for (std::size_t i = 0; i < 2 * n; ++i) {
            if (norms[i] == 0.0) continue;
            auto ui = batch.embeddings.row(i);
            auto gi = gu.row(i);
            double dot = 0.0;
            for (std::size_t a = 0; a < p; ++a) dot += gi[a] * ui[a];
            auto zi = views.row(i);
            const double inv = 1.0 / norms[i];
            for (std::size_t a = 0; a < p; ++a) {
                const double gv = (gi[a] - dot * ui[a]) * inv;
                double* dwrow = &dw(a, 0);
                for (std::size_t j = 0; j < d; ++j) dwrow[j] += gv * zi[j];
            }
        }
        for (std::size_t idx = 0; idx < w.data.size(); ++idx)
            w.data[idx] -= lr * dw.data[idx];
    }
    return result;
}

}  // namespace ssd
