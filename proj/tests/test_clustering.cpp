#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ssd/clustering.hpp"
#include "ssd/numerics.hpp"

using namespace ssd;
using namespace test_support;

namespace {

// two seeded blobs at +/- center, n per blob; rows alternate blobs
Matrix two_blobs(std::size_t n_per, std::size_t d, double center, std::uint64_t seed,
                 std::vector<std::size_t>* labels = nullptr) {
    ssd::Rng rng(seed);
    Matrix m(2 * n_per, d);
    if (labels) labels->resize(2 * n_per);
    for (std::size_t i = 0; i < 2 * n_per; ++i) {
        const double mu = i % 2 == 0 ? center : -center;
        if (labels) (*labels)[i] = i % 2;
        auto r = m.row(i);
        for (std::size_t j = 0; j < d; ++j) r[j] = (j == 0 ? mu : 0.0) + rng.normal();
    }
    return m;
}

double recompute_inertia(const Matrix& features, const KMeansModel& model) {
    double total = 0.0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        auto r = features.row(i);
        auto c = model.centroids.row(model.assignments[i]);
        for (std::size_t j = 0; j < features.cols; ++j)
            total += (r[j] - c[j]) * (r[j] - c[j]);
    }
    return total;
}

}  // namespace

TEST_CASE("kmeans_fit degenerate shapes") {
    const Matrix data = random_matrix(12, 3, 5);
    SUBCASE("m = n puts every point in its own cluster") {
        const auto model = kmeans_fit(data, 12, 9);
        CHECK(model.inertia == doctest::Approx(0.0).epsilon(1e-12));
        std::vector<bool> used(12, false);
        for (std::size_t a : model.assignments) used[a] = true;
        for (bool u : used) CHECK(u);
    }
    SUBCASE("m = 1 reduces to the global mean") {
        const auto model = kmeans_fit(data, 1, 9);
        const auto est = sample_mean_cov(data);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(model.centroids(0, j) == doctest::Approx(est.mean[j]).epsilon(1e-12));
        double trace = 0.0;
        for (std::size_t j = 0; j < 3; ++j) trace += est.covariance(j, j);
        CHECK(model.inertia ==
              doctest::Approx(static_cast<double>(data.rows) * trace).epsilon(1e-9));
    }
    SUBCASE("m = 0 and m > n are errors") {
        CHECK_THROWS_AS((void)kmeans_fit(data, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS((void)kmeans_fit(data, 13, 1), std::invalid_argument);
    }
}

TEST_CASE("kmeans_fit separates two blobs with full purity") {
    std::vector<std::size_t> labels;
    const Matrix data = two_blobs(40, 4, 12.0, 21, &labels);
    const auto model = kmeans_fit(data, 2, 3);

    // map each cluster to the generator label of its first member
    std::size_t cluster_of_label0 = model.assignments[0];
    std::size_t cluster_of_label1 = model.assignments[1];
    CHECK(cluster_of_label0 != cluster_of_label1);
    for (std::size_t i = 0; i < data.rows; ++i) {
        const std::size_t expect =
            labels[i] == 0 ? cluster_of_label0 : cluster_of_label1;
        CHECK(model.assignments[i] == expect);
    }
    CHECK(model.inertia < kmeans_fit(data, 1, 3).inertia);
}

TEST_CASE("kmeans_fit model invariants") {
    const Matrix data = random_matrix(60, 5, 33);
    const auto model = kmeans_fit(data, 4, 7);

    SUBCASE("assignments in range and all clusters populated") {
        std::vector<std::size_t> count(4, 0);
        for (std::size_t a : model.assignments) {
            CHECK(a < 4);
            ++count[a];
        }
        for (std::size_t c : count) CHECK(c > 0);
    }
    SUBCASE("centroids equal the mean of their members at convergence") {
        for (std::size_t c = 0; c < 4; ++c) {
            std::vector<double> mean(5, 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < data.rows; ++i) {
                if (model.assignments[i] != c) continue;
                ++count;
                for (std::size_t j = 0; j < 5; ++j) mean[j] += data(i, j);
            }
            REQUIRE(count > 0);
            for (std::size_t j = 0; j < 5; ++j)
                CHECK(model.centroids(c, j) ==
                      doctest::Approx(mean[j] / static_cast<double>(count)).epsilon(1e-9));
        }
    }
    SUBCASE("stored inertia equals the recomputed sum") {
        CHECK(model.inertia ==
              doctest::Approx(recompute_inertia(data, model)).epsilon(1e-9));
    }
    SUBCASE("bit-deterministic for fixed inputs") {
        const auto again = kmeans_fit(data, 4, 7);
        CHECK(again.centroids.data == model.centroids.data);
        CHECK(again.assignments == model.assignments);
        CHECK(again.inertia == model.inertia);
    }
}

TEST_CASE("kmeans_fit survives duplicate-heavy data") {
    // only two distinct points but three clusters requested; the empty-cluster
    // repair has to keep all three populated
    Matrix data(6, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        data(i, 0) = i < 3 ? 1.0 : -1.0;
       data(i, 1) = 0.0;
    }
    const auto model = kmeans_fit(data, 3, 11);
    std::vector<std::size_t> count(3, 0);
    for (std::size_t a : model.assignments) ++count[a];
    for (std::size_t c : count) CHECK(c > 0);
    CHECK(model.inertia >= 0.0);
}

TEST_CASE("assign_nearest") {
    Matrix data(4, 2);
    data(0, 0) = -2.0;
    data(1, 0) = -1.9;
    data(2, 0) = 2.0;
    data(3, 0) = 2.1;
    const auto model = kmeans_fit(data, 2, 1);

    SUBCASE("a point sitting on centroid j maps to j") {
        for (std::size_t c = 0; c < 2; ++c) {
            Matrix p(1, 2);
            p(0, 0) = model.centroids(c, 0);
            p(0, 1) = model.centroids(c, 1);
            CHECK(assign_nearest(model, p)[0] == c);
        }
    }
    SUBCASE("equidistant point breaks the tie toward the lower index") {
        Matrix p(1, 2);
        p(0, 0) = 0.5 * (model.centroids(0, 0) + model.centroids(1, 0));
        p(0, 1) = 0.5 * (model.centroids(0, 1) + model.centroids(1, 1));
        CHECK(assign_nearest(model, p)[0] == 0);
    }
    SUBCASE("seeded batch matches a brute-force scan") {
        const Matrix big = random_matrix(80, 3, 44);
        const auto m3 = kmeans_fit(big, 5, 2);
        const Matrix queries = random_matrix(30, 3, 45);
        const auto got = assign_nearest(m3, queries);
        for (std::size_t i = 0; i < queries.rows; ++i) {
            std::size_t best = 0;
            double best_d = 1e300;
            for (std::size_t c = 0; c < 5; ++c) {
                double dist = 0.0;
                for (std::size_t j = 0; j < 3; ++j) {
                    const double v = queries(i, j) - m3.centroids(c, j);
                    dist += v * v;
                }
                if (dist < best_d) {
                    best_d = dist;
                    best = c;
                }
            }
            CHECK(got[i] == best);
        }
    }
    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS((void)assign_nearest(model, Matrix(1, 3)), std::invalid_argument);
    }
}
