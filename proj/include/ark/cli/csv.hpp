#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ark/core/errors.hpp"

#ifndef ARK_BUILD_ID
#define ARK_BUILD_ID "dev"
#endif

namespace ark::cli {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form, independent of the locale.
inline std::string format_number(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, r.ptr};
}

inline std::string format_number(std::int64_t x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, r.ptr};
}

/// One CSV cell; numbers go through format_number.
class Cell {
public:
    Cell(double x) : text_(format_number(x)) {}
    Cell(int x) : text_(format_number(static_cast<std::int64_t>(x))) {}
    Cell(long x) : text_(format_number(static_cast<std::int64_t>(x))) {}
    Cell(long long x) : text_(format_number(static_cast<std::int64_t>(x))) {}
    Cell(unsigned long x) : text_(format_number(static_cast<std::int64_t>(x))) {}
    Cell(std::string s) : text_(std::move(s)) {}
    Cell(const char* s) : text_(s) {}

    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

/// In-memory table written with LF endings, a header row and a trailing
/// metadata row "# schema_version=..,build=..[,key=value...]".
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<Cell> row) {
        if (row.size() != header_.size()) {
            throw DimensionMismatch("CsvTable: row has " + std::to_string(row.size()) +
                                    " cells, header has " + std::to_string(header_.size()));
        }
        std::vector<std::string> r;
        r.reserve(row.size());
        for (const Cell& c : row) {
            r.push_back(c.text());
        }
        rows_.push_back(std::move(r));
    }

    void add_meta(std::string key, std::string value) {
        meta_.emplace_back(std::move(key), std::move(value));
    }

    std::size_t size() const noexcept { return rows_.size(); }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

    std::string str() const {
        std::string out;
        auto line = [&out](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i > 0) {
                    out += ',';
                }
                out += cells[i];
            }
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) {
            line(r);
        }
        out += "# schema_version=" + std::to_string(kSchemaVersion) + ",build=" + ARK_BUILD_ID;
        for (const auto& [k, v] : meta_) {
            out += "," + k + "=" + v;
        }
        out += '\n';
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            throw Error("cannot write " + path);
        }
        const std::string s = str();
        f.write(s.data(), static_cast<std::streamsize>(s.size()));
        if (!f) {
            throw Error("write failed: " + path);
        }
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::pair<std::string, std::string>> meta_;
};

} // namespace ark::cli
