#include "ssd/model_io.hpp"

#include <stdexcept>

#include "json.hpp"
#include "ssd/io.hpp"

namespace ssd {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) { return json(m.data); }

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols,
                        const char* field) {
    Matrix m(rows, cols);
    const auto vals = j.get<std::vector<double>>();
    if (vals.size() != rows * cols)
        throw std::runtime_error(std::string(field) + ": expected " +
                                 std::to_string(rows * cols) + " values, got " +
                                 std::to_string(vals.size()));
    m.data = vals;
    return m;
}

json parse_document(const std::string& path, const char* schema) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": malformed JSON: " + e.what());
    }
    const std::string found = j.value("schema", "<missing>");
    if (found != schema)
        throw std::runtime_error(path + ": expected schema " + schema + ", found " + found);
    return j;
}

json model_to_json(const DetectorModel& model) {
    json clusters = json::array();
    for (const auto& c : model.clusters) {
        clusters.push_back({{"mu", c.mu},
                            {"chol", matrix_to_json(c.chol)},
                            {"eigenvalues", c.eigen.eigenvalues},
                            {"eigenvectors", matrix_to_json(c.eigen.eigenvectors)},
                            {"weight", c.weight}});
    }
    return {{"schema", "ssd-model/1"},
            {"m", model.m},
            {"d", model.d},
            {"normalization", model.normalization},
            {"fit_seed", model.fit_seed},
            {"source_hash", model.source_hash},
            {"clusters", std::move(clusters)}};
}

DetectorModel model_from_json(const json& j, const std::string& context) {
    DetectorModel model;
    try {
        model.m = j.at("m").get<std::size_t>();
        model.d = j.at("d").get<std::size_t>();
        model.normalization = j.at("normalization").get<bool>();
        model.fit_seed = j.at("fit_seed").get<std::uint64_t>();
        model.source_hash = j.at("source_hash").get<std::uint64_t>();
        const auto& clusters = j.at("clusters");
        if (clusters.size() != model.m)
            throw std::runtime_error("cluster count " + std::to_string(clusters.size()) +
                                     " does not match m=" + std::to_string(model.m));
        const std::size_t d = model.d;
        for (const auto& cj : clusters) {
            ClusterGaussian c;
            c.mu = cj.at("mu").get<std::vector<double>>();
            if (c.mu.size() != d) throw std::runtime_error("mu dimension mismatch");
            c.chol = matrix_from_json(cj.at("chol"), d, d, "chol");
            c.eigen.eigenvalues = cj.at("eigenvalues").get<std::vector<double>>();
            if (c.eigen.eigenvalues.size() != d)
                throw std::runtime_error("eigenvalue count mismatch");
            c.eigen.eigenvectors =
                matrix_from_json(cj.at("eigenvectors"), d, d, "eigenvectors");
            c.weight = cj.at("weight").get<double>();
            model.clusters.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(context + ": malformed model document: " + e.what());
    }
    return model;
}

}  // namespace

void save_model(const DetectorModel& model, const std::string& path) {
    atomic_write_file(path, model_to_json(model).dump(2) + "\n");
}

DetectorModel load_model(const std::string& path) {
    return model_from_json(parse_document(path, "ssd-model/1"), path);
}

void save_fewshot(const FewShotModel& model, const std::string& path) {
    json j{{"schema", "ssd-fewshot/1"},
           {"in_model", model_to_json(model.in_model)},
           {"ood_mean", model.ood_mean},
           {"ood_chol", matrix_to_json(model.ood_chol)},
           {"k", model.k},
           {"n_augment", model.n_augment},
           {"ood_shrinkage", model.ood_shrinkage}};
    j["in_model"]["schema"] = "ssd-model/1";
    atomic_write_file(path, j.dump(2) + "\n");
}

FewShotModel load_fewshot(const std::string& path) {
    const json j = parse_document(path, "ssd-fewshot/1");
    FewShotModel model;
    try {
        model.in_model = model_from_json(j.at("in_model"), path);
        model.ood_mean = j.at("ood_mean").get<std::vector<double>>();
        const std::size_t d = model.in_model.d;
        if (model.ood_mean.size() != d)
            throw std::runtime_error("ood_mean dimension mismatch");
        model.ood_chol = matrix_from_json(j.at("ood_chol"), d, d, "ood_chol");
        model.k = j.at("k").get<std::size_t>();
        model.n_augment = j.at("n_augment").get<std::size_t>();
        model.ood_shrinkage = j.at("ood_shrinkage").get<double>();
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": malformed few-shot document: " + e.what());
    }
    return model;
}

void save_calibration(const Calibration& cal, const std::string& path) {
    const json j{{"schema", "ssd-cal/1"},
                 {"threshold", cal.threshold},
                 {"target_tpr", cal.target_tpr},
                 {"cal_count", cal.cal_count}};
    atomic_write_file(path, j.dump(2) + "\n");
}

Calibration load_calibration(const std::string& path) {
    const json j = parse_document(path, "ssd-cal/1");
    Calibration cal;
    try {
        cal.threshold = j.at("threshold").get<double>();
        cal.target_tpr = j.at("target_tpr").get<double>();
        cal.cal_count = j.at("cal_count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": malformed calibration document: " + e.what());
    }
    return cal;
}

void save_toy_encoder(const ToyEncoder& enc, const std::string& path) {
    const json j{{"schema", "ssd-toy-encoder/1"},
                 {"input_dim", enc.input_dim},
                 {"output_dim", enc.output_dim},
                 {"seed", enc.seed},
                 {"weights", matrix_to_json(enc.weights)}};
    atomic_write_file(path, j.dump(2) + "\n");
}

ToyEncoder load_toy_encoder(const std::string& path) {
    const json j = parse_document(path, "ssd-toy-encoder/1");
    ToyEncoder enc;
    try {
        enc.input_dim = j.at("input_dim").get<std::size_t>();
        enc.output_dim = j.at("output_dim").get<std::size_t>();
        enc.seed = j.at("seed").get<std::uint64_t>();
        enc.weights =
            matrix_from_json(j.at("weights"), enc.output_dim, enc.input_dim, "weights");
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": malformed encoder document: " + e.what());
    }
    return enc;
}

}  // namespace ssd
