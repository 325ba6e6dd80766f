#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ssd/matrix.hpp"

namespace ssd {

struct KMeansModel {
    std::size_t m = 0;
    Matrix centroids;                     // m x d
    std::vector<std::size_t> assignments; // length n, values < m
    double inertia = 0.0;                 // sum of squared distances to assigned centroid
    std::size_t iterations_run = 0;
    std::uint64_t seed = 0;
};

// k-means++ seeding, then Lloyd iterations until the max centroid shift is
// below 1e-6 or 100 iterations. Empty clusters are repaired by stealing the
// point farthest from its assigned centroid. Deterministic given
// (features, m, seed); ties always resolve to the lowest index.
KMeansModel kmeans_fit(const Matrix& features, std::size_t m, std::uint64_t seed);

// Nearest-centroid assignment by squared euclidean distance, ties to the
// lowest centroid index.
std::vector<std::size_t> assign_nearest(const KMeansModel& model, const Matrix& points);

}  // namespace ssd
