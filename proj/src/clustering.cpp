#include "ssd/clustering.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ssd/rng.hpp"

namespace ssd {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double v = a[j] - b[j];
        s += v * v;
    }
    return s;
}

// squared distance from every point to its nearest chosen centroid
void update_min_dist(const Matrix& features, std::span<const double> centroid,
                     std::vector<double>& min_d2) {
    for (std::size_t i = 0; i < features.rows; ++i) {
        const double d2 = sq_dist(features.row(i), centroid);
        if (d2 < min_d2[i]) min_d2[i] = d2;
    }
}

Matrix kmeanspp_init(const Matrix& features, std::size_t m, Rng& rng) {
    const std::size_t n = features.rows, d = features.cols;
    Matrix centroids(m, d);
    std::vector<bool> chosen(n, false);

    std::size_t first = rng.index(n);
    chosen[first] = true;
    for (std::size_t j = 0; j < d; ++j) centroids(0, j) = features(first, j);

    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < m; ++c) {
        update_min_dist(features, centroids.row(c - 1), min_d2);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += min_d2[i];

        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) pick = n - 1;  // fp slack on the last point
        }
        if (pick == n || chosen[pick]) {
            // all mass at already-chosen points (duplicates): lowest unchosen index
            pick = 0;
            while (pick < n && chosen[pick]) ++pick;
            if (pick == n) pick = 0;
        }
        chosen[pick] = true;
        for (std::size_t j = 0; j < d; ++j) centroids(c, j) = features(pick, j);
    }
    return centroids;
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& features, std::size_t m, std::uint64_t seed) {
    const std::size_t n = features.rows, d = features.cols;
    if (m == 0) throw std::invalid_argument("kmeans_fit: m must be >= 1");
    if (m > n) throw std::invalid_argument("kmeans_fit: m exceeds number of points");

    Rng rng(seed);
    KMeansModel model;
    model.m = m;
    model.seed = seed;
    model.centroids = kmeanspp_init(features, m, rng);
    model.assignments.assign(n, 0);

    std::vector<std::size_t> counts(m);
    Matrix next(m, d);
#ifndef NDEBUG
    double prev_inertia = std::numeric_limits<double>::infinity();
#endif

    for (std::size_t iter = 1; iter <= 100; ++iter) {
        model.iterations_run = iter;

        for (std::size_t i = 0; i < n; ++i) {  // assign, ties to lowest index
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < m; ++c) {
                const double d2 = sq_dist(features.row(i), model.centroids.row(c));
                if (d2 < best) {
                    best = d2;
                    arg = c;
                }
            }
            model.assignments[i] = arg;
        }

        // repair empty clusters: steal the point farthest from its centroid
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) ++counts[model.assignments[i]];
        for (std::size_t c = 0; c < m; ++c) {
            if (counts[c] != 0) continue;
            double far = -1.0;
            std::size_t steal = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[model.assignments[i]] <= 1) continue;  // keep donors non-empty
                const double d2 =
                    sq_dist(features.row(i), model.centroids.row(model.assignments[i]));
                if (d2 > far) {
                    far = d2;
                    steal = i;
                }
            }
            --counts[model.assignments[steal]];
            model.assignments[steal] = c;
            ++counts[c];
        }

        // recompute centroids from the assignment
        next.data.assign(next.data.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = features.row(i);
            auto out = next.row(model.assignments[i]);
            for (std::size_t j = 0; j < d; ++j) out[j] += r[j];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            auto out = next.row(c);
            for (std::size_t j = 0; j < d; ++j) out[j] /= static_cast<double>(counts[c]);
            shift = std::max(shift, sq_dist(out, model.centroids.row(c)));
        }
        model.centroids = next;

        model.inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            model.inertia +=
                sq_dist(features.row(i), model.centroids.row(model.assignments[i]));
        }
#ifndef NDEBUG
        assert(model.inertia <= prev_inertia * (1.0 + 1e-12) + 1e-12);
        prev_inertia = model.inertia;
#endif
        if (std::sqrt(shift) < 1e-6) break;
    }
    return model;
}

std::vector<std::size_t> assign_nearest(const KMeansModel& model, const Matrix& points) {
    if (points.cols != model.centroids.cols)
        throw std::invalid_argument("assign_nearest: dimension mismatch");
    std::vector<std::size_t> out(points.rows, 0);
    for (std::size_t i = 0; i < points.rows; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < model.m; ++c) {
            const double d2 = sq_dist(points.row(i), model.centroids.row(c));
            if (d2 < best) {
                best = d2;
                out[i] = c;
            }
        }
    }
    return out;
}

}  // namespace ssd
