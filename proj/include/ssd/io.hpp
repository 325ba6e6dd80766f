#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssd/matrix.hpp"

namespace ssd {

enum class FeatureFormat { csv, binary };

// synthetic data recipe; covariance is diagonal, shared across components
struct SynthSpec {
    std::string kind = "gmm";  // gmm | shifted-gmm | blobs2d
    std::size_t d = 2;
    std::size_t components = 1;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> means;  // per component; empty → zeros
    std::vector<double> cov_diag;            // empty → identity, 1 value → isotropic
    std::vector<std::size_t> shift_dims;     // shifted-gmm only
    double shift_mag = 0.0;                  // shifted-gmm only
};

struct GeneratedData {
    Matrix features;
    std::vector<std::size_t> labels;  // source component per row
};

struct SplitResult {
    Matrix train;
    Matrix cal;
};

struct RunConfig {
    std::size_t clusters = 1;
    double tpr = 0.95;
    std::size_t k = 5;
    std::size_t n_augment = 10;
    double jitter_scale = 0.1;
    std::uint64_t seed = 0;
    double split = 0.9;
};

void validate(const RunConfig& cfg);

// format is sniffed from the leading magic bytes
Matrix load_features(const std::string& path);
void save_features(const Matrix& m, const std::string& path, FeatureFormat format);

GeneratedData generate(const SynthSpec& spec);

SplitResult partition(const Matrix& features, double split, std::uint64_t seed);

// FNV-1a over dimensions and raw element bytes
std::uint64_t feature_hash(const Matrix& m);

// whole-file replace via temp file + rename
void atomic_write_file(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace ssd
