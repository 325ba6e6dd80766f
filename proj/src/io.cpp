#include "ssd/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

#include "ssd/rng.hpp"

namespace ssd {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'D', 'F'};
constexpr unsigned char kVersion = 1;

void append_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64le(std::string& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double read_f64le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

Matrix parse_binary(const std::string& path, const std::string& bytes) {
    if (bytes.size() < 13)
        throw std::runtime_error(path + ": binary header truncated (need 13 bytes, found " +
                                 std::to_string(bytes.size()) + ")");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (p[4] != kVersion)
        throw std::runtime_error(path + ": unsupported binary version " +
                                 std::to_string(static_cast<int>(p[4])));
    const std::uint32_t n = read_u32le(p + 5);
    const std::uint32_t d = read_u32le(p + 9);
    const std::size_t need = 13 + static_cast<std::size_t>(n) * d * 8;
    if (bytes.size() != need)
        throw std::runtime_error(path + ": truncated binary payload (expected " +
                                 std::to_string(need) + " bytes, found " +
                                 std::to_string(bytes.size()) + ")");
    Matrix m(n, d);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        m.data[i] = read_f64le(p + 13 + 8 * i);
        if (!std::isfinite(m.data[i]))
            throw std::runtime_error(path + ": non-finite value at row " +
                                     std::to_string(i / d) + ", column " +
                                     std::to_string(i % d) + " (byte offset " +
                                     std::to_string(13 + 8 * i) + ")");
    }
    return m;
}

Matrix parse_csv(const std::string& path, const std::string& text) {
    std::vector<double> values;
    std::size_t cols = 0, rows = 0;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        ++line_no;
        std::size_t end = eol;
        if (end > pos && text[end - 1] == '\r') --end;
        std::size_t start = pos;
        pos = eol + 1;
        while (start < end && (text[start] == ' ' || text[start] == '\t')) ++start;
        if (start == end) continue;
        if (text[start] == '#') continue;

        std::size_t row_cols = 0;
        std::size_t field = start;
        while (field <= end) {
            std::size_t comma = text.find(',', field);
            if (comma == std::string::npos || comma > end) comma = end;
            std::size_t a = field, b = comma;
            while (a < b && (text[a] == ' ' || text[a] == '\t')) ++a;
            while (b > a && (text[b - 1] == ' ' || text[b - 1] == '\t')) --b;
            double v = 0.0;
            const auto res = std::from_chars(text.data() + a, text.data() + b, v);
            if (res.ec != std::errc{} || res.ptr != text.data() + b)
                throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                         ": cannot parse '" + text.substr(a, b - a) +
                                         "' as a number");
            if (!std::isfinite(v))
                throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                         ": non-finite value '" + text.substr(a, b - a) + "'");
            values.push_back(v);
            ++row_cols;
            field = comma + 1;
            if (comma == end) break;
        }
        if (rows == 0) {
            cols = row_cols;
        } else if (row_cols != cols) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(cols) + " values, got " +
                                     std::to_string(row_cols));
        }
        ++rows;
    }
    if (rows == 0) throw std::runtime_error(path + ": no data rows");
    Matrix m(rows, cols);
    m.data = std::move(values);
    return m;
}

}  // namespace

void validate(const RunConfig& cfg) {
    if (cfg.clusters < 1) throw std::invalid_argument("clusters must be >= 1");
    if (!(cfg.tpr > 0.0 && cfg.tpr <= 1.0))
        throw std::invalid_argument("tpr target must lie in (0, 1]");
    if (!(cfg.split > 0.0 && cfg.split < 1.0))
        throw std::invalid_argument("split must lie in (0, 1)");
    if (cfg.k < 1) throw std::invalid_argument("k must be >= 1");
    if (cfg.n_augment < 1) throw std::invalid_argument("n_augment must be >= 1");
    if (!(cfg.jitter_scale >= 0.0) || !std::isfinite(cfg.jitter_scale))
        throw std::invalid_argument("jitter_scale must be finite and >= 0");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error("read error on " + path);
    return out;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw std::runtime_error("write error on " + path);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot replace " + path + ": " + ec.message());
    }
}

Matrix load_features(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 4 && bytes.compare(0, 4, kMagic, 4) == 0)
        return parse_binary(path, bytes);
    return parse_csv(path, bytes);
}

void save_features(const Matrix& m, const std::string& path, FeatureFormat format) {
    std::string out;
    if (format == FeatureFormat::binary) {
        out.reserve(13 + m.data.size() * 8);
        out.append(kMagic, 4);
        out.push_back(static_cast<char>(kVersion));
        append_u32le(out, static_cast<std::uint32_t>(m.rows));
        append_u32le(out, static_cast<std::uint32_t>(m.cols));
        for (double v : m.data) append_f64le(out, v);
    } else {
        char buf[64];
        for (std::size_t i = 0; i < m.rows; ++i) {
            for (std::size_t j = 0; j < m.cols; ++j) {
                const auto res = std::to_chars(buf, buf + sizeof(buf), m(i, j));
                if (j) out.push_back(',');
                out.append(buf, res.ptr);
            }
            out.push_back('\n');
        }
    }
    atomic_write_file(path, out);
}

GeneratedData generate(const SynthSpec& spec) {
    if (spec.kind != "gmm" && spec.kind != "shifted-gmm" && spec.kind != "blobs2d")
        throw std::invalid_argument("unknown synth kind '" + spec.kind + "'");
    if (spec.d < 1) throw std::invalid_argument("d must be >= 1");
    if (spec.components < 1) throw std::invalid_argument("components must be >= 1");
    if (spec.kind == "blobs2d" && spec.components != 2)
        throw std::invalid_argument("blobs2d requires exactly 2 components");

    std::vector<double> var(spec.d, 1.0);
    if (spec.cov_diag.size() == 1) {
        var.assign(spec.d, spec.cov_diag[0]);
    } else if (spec.cov_diag.size() == spec.d) {
        var = spec.cov_diag;
    } else if (!spec.cov_diag.empty()) {
        throw std::invalid_argument("covariance descriptor must have 1 or d entries, got " +
                                    std::to_string(spec.cov_diag.size()));
    }
    for (double v : var)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("covariance descriptor entries must be positive");

    std::vector<std::vector<double>> means = spec.means;
    if (means.empty()) {
        means.assign(spec.components, std::vector<double>(spec.d, 0.0));
        if (spec.kind == "blobs2d") means[1][0] = 4.0;  // default separation
    }
    if (means.size() != spec.components)
        throw std::invalid_argument("need one mean per component, got " +
                                    std::to_string(means.size()));
    for (const auto& mu : means)
        if (mu.size() != spec.d)
            throw std::invalid_argument("mean dimension mismatch: expected " +
                                        std::to_string(spec.d) + ", got " +
                                        std::to_string(mu.size()));
    if (spec.kind == "shifted-gmm") {
        for (std::size_t dim : spec.shift_dims) {
            if (dim >= spec.d)
                throw std::invalid_argument("shift dim " + std::to_string(dim) +
                                            " out of range for d=" + std::to_string(spec.d));
            for (auto& mu : means) mu[dim] += spec.shift_mag;
        }
    }

    std::vector<double> sd(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) sd[j] = std::sqrt(var[j]);

    GeneratedData out;
    out.features = Matrix(spec.n, spec.d);
    out.labels.resize(spec.n);
    Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t c = i % spec.components;
        out.labels[i] = c;
        auto row = out.features.row(i);
        for (std::size_t j = 0; j < spec.d; ++j) row[j] = means[c][j] + sd[j] * rng.normal();
    }
    return out;
}

SplitResult partition(const Matrix& features, double split, std::uint64_t seed) {
    const std::size_t n = features.rows;
    if (n < 2) throw std::invalid_argument("partition needs at least 2 rows");
    if (!(split > 0.0 && split < 1.0))
        throw std::invalid_argument("split must lie in (0, 1)");

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);

    auto cut = static_cast<std::size_t>(std::floor(split * static_cast<double>(n) + 1e-9));
    cut = std::max<std::size_t>(1, std::min(cut, n - 1));

    SplitResult out;
    out.train = Matrix(cut, features.cols);
    out.cal = Matrix(n - cut, features.cols);
    for (std::size_t i = 0; i < cut; ++i) {
        auto src = features.row(idx[i]);
        std::copy(src.begin(), src.end(), out.train.row(i).begin());
    }
    for (std::size_t i = cut; i < n; ++i) {
        auto src = features.row(idx[i]);
        std::copy(src.begin(), src.end(), out.cal.row(i - cut).begin());
    }
    return out;
}

std::uint64_t feature_hash(const Matrix& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t word) {
        for (int i = 0; i < 8; ++i) {
            h ^= (word >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(m.rows);
    mix(m.cols);
    for (double v : m.data) mix(std::bit_cast<std::uint64_t>(v));
    return h;
}

}  // namespace ssd
