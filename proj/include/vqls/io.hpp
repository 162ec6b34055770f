#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vqls/errors.hpp"
#include "vqls/pauli_string.hpp"

namespace vqls::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline bool parse_double(std::string_view s, double &out) {
    if (s.empty()) {
        return false;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace detail

/**
 * Parses a real literal or a complex literal of the form "a+bi", "a-bi",
 * "bi", "-i". Whitespace around the value is ignored.
 */
[[nodiscard]] inline Complex parse_complex(std::string_view text) {
    const std::string_view s = detail::trim(text);
    if (s.empty()) {
        throw ArgumentError("empty numeric field");
    }
    double re = 0.0;
    if (s.back() != 'i' && s.back() != 'j') {
        if (!detail::parse_double(s, re)) {
            throw ArgumentError("cannot parse number '" + std::string(s) + "'");
        }
        return {re, 0.0};
    }
    const std::string_view body = s.substr(0, s.size() - 1);
    // Split at the last sign that is not part of an exponent.
    std::size_t split = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    const std::string_view re_part = split == std::string_view::npos ? "" : body.substr(0, split);
    std::string_view im_part = split == std::string_view::npos ? body : body.substr(split);
    double im = 0.0;
    if (im_part.empty() || im_part == "+") {
        im = 1.0;
    } else if (im_part == "-") {
        im = -1.0;
    } else if (!detail::parse_double(im_part, im)) {
        throw ArgumentError("cannot parse complex literal '" + std::string(s) + "'");
    }
    if (!re_part.empty() && !detail::parse_double(re_part, re)) {
        throw ArgumentError("cannot parse complex literal '" + std::string(s) + "'");
    }
    return {re, im};
}

[[nodiscard]] inline std::vector<std::vector<Complex>> read_csv_table(
    const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::vector<std::vector<Complex>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty() || detail::trim(line).front() == '#') {
            continue;
        }
        std::vector<Complex> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                row.push_back(parse_complex(field));
            } catch (const ArgumentError &e) {
                throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Dense matrix from a row-major CSV file.
[[nodiscard]] inline Eigen::MatrixXcd read_matrix_csv(const std::filesystem::path &path) {
    const auto rows = read_csv_table(path);
    if (rows.empty()) {
        throw IoError("'" + path.string() + "' contains no matrix rows");
    }
    const auto cols = rows.front().size();
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) {
            throw IoError("'" + path.string() + "': row " + std::to_string(r + 1) + " has " +
                          std::to_string(rows[r].size()) + " fields, expected " +
                          std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

/// Vector from a CSV file holding either one row or one column.
[[nodiscard]] inline Eigen::VectorXcd read_vector_csv(const std::filesystem::path &path) {
    const auto rows = read_csv_table(path);
    std::vector<Complex> flat;
    for (const auto &r : rows) {
        flat.insert(flat.end(), r.begin(), r.end());
    }
    if (flat.empty()) {
        throw IoError("'" + path.string() + "' contains no values");
    }
    if (rows.size() > 1 && rows.front().size() > 1) {
        throw IoError("'" + path.string() + "' is a matrix, expected a vector");
    }
    Eigen::VectorXcd v(static_cast<Eigen::Index>(flat.size()));
    for (std::size_t i = 0; i < flat.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = flat[i];
    }
    return v;
}

/// Shortest round-trip representation; "nan" / "inf" / "-inf" for non-finite values.
[[nodiscard]] inline std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline void write_text(const std::filesystem::path &path, const std::string &content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory '" + path.parent_path().string() +
                          "': " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << content;
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

} // namespace vqls::io
