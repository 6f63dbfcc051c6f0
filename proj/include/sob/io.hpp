#ifndef SOB_IO_HPP
#define SOB_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sob/classify.hpp"
#include "sob/kernel.hpp"
#include "sob/klds.hpp"

namespace sob {

constexpr int kDescriptorFormatVersion = 1;

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Write-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw InputError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace detail

/// CSV stream format: header bin_0..bin_{p-1}, one row per time step.
inline void write_stream(const HistogramStream& stream, const std::filesystem::path& path) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < stream.dim(); ++i) out << (i ? "," : "") << "bin_" << i;
    out << "\n";
    for (Eigen::Index t = 0; t < stream.length(); ++t) {
        for (Eigen::Index i = 0; i < stream.dim(); ++i)
            out << (i ? "," : "") << detail::fmt17(stream.matrix()(i, t));
        out << "\n";
    }
    detail::atomic_write(path, out.str());
}

inline HistogramStream read_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open stream file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
    const std::size_t p = detail::split_csv_line(line).size();
    if (p == 0) throw InputError(path.string() + ":1: empty header");

    std::vector<Vector> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != p)
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(p) + " fields, got " + std::to_string(fields.size()));
        Vector row = Vector::Zero(long(p));
        for (std::size_t i = 0; i < p; ++i) {
            try {
                std::size_t used = 0;
                row(long(i)) = std::stod(fields[i], &used);
                if (used != fields[i].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw InputError(path.string() + ":" + std::to_string(lineno) + ": column " +
                                 std::to_string(i + 1) + ": not a number: '" + fields[i] + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path.string() + ": no data rows");
    Matrix cols(long(p), long(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) cols.col(long(t)) = rows[t];
    try {
        return HistogramStream::from_matrix(cols);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

inline nlohmann::json descriptor_to_json(const KldsDescriptor& theta) {
    const auto flatten = [](const Matrix& M) {
        std::vector<double> v;
        v.reserve(std::size_t(M.size()));
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            for (Eigen::Index j = 0; j < M.cols(); ++j) v.push_back(M(i, j));
        return v;
    };
    nlohmann::json j;
    j["version"] = kDescriptorFormatVersion;
    j["n"] = theta.order();
    j["p"] = theta.dim();
    j["N"] = theta.samples();
    j["kernel"] = "chi2";
    j["A"] = flatten(theta.A);
    j["alpha"] = flatten(theta.alpha);
    j["beta"] = std::vector<double>(theta.beta.data(), theta.beta.data() + theta.beta.size());
    j["Y"] = flatten(theta.Y.matrix());
    return j;
}

inline KldsDescriptor descriptor_from_json(const nlohmann::json& j) {
    for (const char* field : {"version", "n", "p", "N", "kernel", "A", "alpha", "beta", "Y"})
        if (!j.contains(field)) throw InputError(std::string("descriptor: missing field '") + field + "'");
    if (j["version"].get<int>() != kDescriptorFormatVersion)
        throw InputError("descriptor: unsupported format version " + j["version"].dump());
    if (j["kernel"].get<std::string>() != "chi2")
        throw InputError("descriptor: unknown kernel '" + j["kernel"].get<std::string>() + "'");
    const Eigen::Index n = j["n"].get<Eigen::Index>();
    const Eigen::Index p = j["p"].get<Eigen::Index>();
    const Eigen::Index N = j["N"].get<Eigen::Index>();

    const auto unflatten = [](const nlohmann::json& arr, Eigen::Index rows, Eigen::Index cols,
                              const char* name) {
        const auto v = arr.get<std::vector<double>>();
        if (Eigen::Index(v.size()) != rows * cols)
            throw InputError(std::string("descriptor: field '") + name + "' has " +
                             std::to_string(v.size()) + " entries, expected " +
                             std::to_string(rows) + "x" + std::to_string(cols));
        Matrix M(rows, cols);
        std::size_t at = 0;
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index jj = 0; jj < cols; ++jj) M(i, jj) = v[at++];
        return M;
    };

    KldsDescriptor theta;
    theta.A = unflatten(j["A"], n, n, "A");
    theta.alpha = unflatten(j["alpha"], N, n, "alpha");
    theta.beta = unflatten(j["beta"], N, 1, "beta");
    theta.Y = HistogramStream::from_matrix(unflatten(j["Y"], p, N, "Y"));
    theta.kernel = KernelSpec{};
    return theta;
}

inline void write_descriptor(const KldsDescriptor& theta, const std::filesystem::path& path) {
    detail::atomic_write(path, descriptor_to_json(theta).dump(2) + "\n");
}

inline KldsDescriptor read_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open descriptor file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return descriptor_from_json(j);
}

struct ManifestEntry {
    std::filesystem::path path;
    std::string label;
};

/// Manifest: JSON list of {path, label}. Relative paths resolve against the
/// manifest's directory. Missing files fail before any computation starts.
inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw InputError(path.string() + ": manifest must be a JSON list");
    std::vector<ManifestEntry> entries;
    const auto base = path.parent_path();
    for (const auto& item : j) {
        if (!item.contains("path") || !item.contains("label"))
            throw InputError(path.string() + ": manifest entries need 'path' and 'label'");
        std::filesystem::path file = item["path"].get<std::string>();
        if (file.is_relative()) file = base / file;
        if (!std::filesystem::exists(file))
            throw InputError(path.string() + ": missing file " + file.string());
        entries.push_back({file, item["label"].get<std::string>()});
    }
    return entries;
}

inline void write_manifest(const std::vector<ManifestEntry>& entries,
                           const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : entries)
        j.push_back({{"path", e.path.string()}, {"label", e.label}});
    detail::atomic_write(path, j.dump(2) + "\n");
}

inline void write_matrix_csv(const Matrix& M, const std::filesystem::path& path) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            out << (j ? "," : "") << detail::fmt17(M(i, j));
        out << "\n";
    }
    detail::atomic_write(path, out.str());
}

}  // namespace sob

#endif
