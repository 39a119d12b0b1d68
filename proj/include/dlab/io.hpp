// io.hpp — CSV formatting, content hashing and JSON helpers for run artifacts.

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "dlab/error.hpp"
#include "dlab/lattice.hpp"

namespace dlab {

using json = nlohmann::json;

// 17 significant digits round-trip every double; NaN is written as "nan".
inline std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    return fmt::format("{:.17g}", x);
}

inline std::string sha1_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("sha1 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

// Same digest `git hash-object` reports for a blob with this content.
inline std::string content_hash(std::string_view content) {
    std::string blob = fmt::format("blob {}", content.size());
    blob.push_back('\0');
    blob.append(content);
    return sha1_hex(blob);
}

inline constexpr std::string_view hash_prefix = "# config_sha1=";

class CsvTable {
public:
    CsvTable(std::string config_hash, std::vector<std::string> columns)
        : hash_(std::move(config_hash)), columns_(std::move(columns)) {}

    class Row {
    public:
        Row& operator<<(double x) { return push(format_double(x)); }
        Row& operator<<(int x) { return push(std::to_string(x)); }
        Row& operator<<(std::size_t x) { return push(std::to_string(x)); }
        Row& operator<<(bool x) { return push(x ? "1" : "0"); }
        Row& operator<<(std::string_view s) { return push(std::string(s)); }
        Row& operator<<(const char* s) { return push(s); }

    private:
        friend class CsvTable;
        explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
        Row& push(std::string s) {
            cells_.push_back(std::move(s));
            return *this;
        }
        std::vector<std::string>& cells_;
    };

    Row row() {
        rows_.emplace_back();
        return Row(rows_.back());
    }

    std::size_t size() const { return rows_.size(); }

    std::string str() const {
        std::string out;
        out += hash_prefix;
        out += hash_;
        out += '\n';
        append_line(out, columns_);
        for (const auto& r : rows_) {
            if (r.size() != columns_.size()) {
                throw Error(fmt::format("csv row has {} cells, header has {}", r.size(), columns_.size()));
            }
            append_line(out, r);
        }
        return out;
    }

private:
    static void append_line(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += cells[i];
        }
        out += '\n';
    }

    std::string hash_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

struct ParsedCsv {
    std::string config_hash;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) {
                return i;
            }
        }
        throw ConfigError(fmt::format("csv has no column '{}'", name));
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot read {}", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ParsedCsv parse_csv(const std::string& text) {
    ParsedCsv out;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind(hash_prefix, 0) != 0) {
        throw ConfigError("csv is missing the config hash line");
    }
    out.config_hash = line.substr(hash_prefix.size());
    if (!std::getline(in, line)) {
        throw ConfigError("csv is missing its header");
    }
    out.columns = split_csv_line(line);
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.rows.push_back(split_csv_line(line));
        }
    }
    return out;
}

inline double parse_double(const std::string& s) {
    if (s == "nan") {
        return std::nan("");
    }
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) {
        throw ConfigError(fmt::format("'{}' is not a number", s));
    }
    return x;
}

// Writes the files only once every one of them is ready; on a failed write, files
// already written by this call are removed.
inline void write_files(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    }
    std::vector<std::filesystem::path> written;
    try {
        for (const auto& [name, content] : files) {
            const auto path = dir / name;
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw ConfigError(fmt::format("cannot write {}", path.string()));
            }
            written.push_back(path);
            out << content;
            if (!out.flush()) {
                throw ConfigError(fmt::format("write to {} failed", path.string()));
            }
        }
    } catch (...) {
        for (const auto& p : written) {
            std::filesystem::remove(p, ec);
        }
        throw;
    }
}

// Complex matrix as nested [re, im] pairs.
inline json to_json(const HamiltonianMatrix& h) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < h.entries.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < h.entries.cols(); ++j) {
            row.push_back({h.entries(i, j).real(), h.entries(i, j).imag()});
        }
        rows.push_back(std::move(row));
    }
    return json{{"delta_b", h.delta_b}, {"entries", std::move(rows)}};
}

inline HamiltonianMatrix hamiltonian_from_json(const json& j) {
    HamiltonianMatrix h;
    h.delta_b = j.at("delta_b").get<double>();
    const auto& rows = j.at("entries");
    const auto n = static_cast<Eigen::Index>(rows.size());
    h.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != n) {
            throw ConfigError("hamiltonian json is not square");
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto& z = row.at(static_cast<std::size_t>(k));
            h.entries(i, k) = cplx(z.at(0).get<double>(), z.at(1).get<double>());
        }
    }
    return h;
}

} // namespace dlab
