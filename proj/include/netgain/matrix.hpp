#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "netgain/errors.hpp"

namespace netgain {

using Vec = std::vector<double>;

/// Dense real matrix, row-major. The universal carrier for interconnection
/// matrices, Lyapunov solutions, and diagonal scalings. Entries are validated
/// to be finite on construction; zero-dimension matrices are permitted so that
/// state-free (purely static) systems can be represented.
class Matrix {
public:
    Matrix() = default;

    Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
        if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
        data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
    }

    Matrix(int rows, int cols, Vec entries) : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
        if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
            throw DimensionError("entry count does not match dimensions");
        check_finite();
    }

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = static_cast<int>(init.size());
        cols_ = rows_ > 0 ? static_cast<int>(init.begin()->size()) : 0;
        data_.reserve(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_));
        for (const auto& row : init) {
            if (static_cast<int>(row.size()) != cols_)
                throw DimensionError("ragged initializer list");
            data_.insert(data_.end(), row.begin(), row.end());
        }
        check_finite();
    }

    [[nodiscard]] static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    [[nodiscard]] static Matrix diagonal(const Vec& d) {
        Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }
    [[nodiscard]] bool is_square() const { return rows_ == cols_; }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    [[nodiscard]] const Vec& data() const { return data_; }

    [[nodiscard]] Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Entrywise absolute value.
    [[nodiscard]] Matrix cwise_abs() const {
        Matrix m = *this;
        for (double& x : m.data_) x = std::fabs(x);
        return m;
    }

    [[nodiscard]] double max_abs() const {
        double m = 0.0;
        for (double x : data_) m = std::max(m, std::fabs(x));
        return m;
    }

    [[nodiscard]] double frobenius_norm() const {
        double s = 0.0;
        for (double x : data_) s += x * x;
        return std::sqrt(s);
    }

    [[nodiscard]] Vec diag() const {
        int n = std::min(rows_, cols_);
        Vec d(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = (*this)(i, i);
        return d;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    void check_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) throw InvalidInputError("matrix entry is not finite");
    }

    int rows_ = 0;
    int cols_ = 0;
    Vec data_;
};

inline Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("matrix addition shape mismatch");
    Matrix c(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
    return c;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("matrix subtraction shape mismatch");
    Matrix c(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
    return c;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matrix product shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix operator*(double s, const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
    return c;
}

inline Vec operator*(const Matrix& a, const Vec& x) {
    if (a.cols() != static_cast<int>(x.size()))
        throw DimensionError("matrix-vector product shape mismatch");
    Vec y(static_cast<std::size_t>(a.rows()), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("dot product length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

// ---------------------------------------------------------------------------
// Text format
//
//   # optional comment lines
//   rows cols
//   a11 a12 ... one whitespace-separated row per line
//
// Values are printed with the shortest decimal representation that round-trips
// bit-exactly.
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal form of a double.
inline std::string format_shortest(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << format_shortest(m(i, j));
        }
        os << '\n';
    }
}

namespace detail {

inline bool is_comment_or_blank(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

/// Splits a line into tokens, recording the 1-based column of each.
inline std::vector<std::pair<std::string, int>> tokenize(const std::string& line) {
    std::vector<std::pair<std::string, int>> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.emplace_back(line.substr(start, i - start), static_cast<int>(start) + 1);
    }
    return out;
}

}  // namespace detail

inline Matrix read_matrix(std::istream& is) {
    std::string line;
    int lineno = 0;
    auto next_data_line = [&]() -> bool {
        while (std::getline(is, line)) {
            ++lineno;
            if (!detail::is_comment_or_blank(line)) return true;
        }
        return false;
    };

    if (!next_data_line()) throw ParseError("missing dimension header", lineno + 1, 1);
    auto header = detail::tokenize(line);
    if (header.size() != 2)
        throw ParseError("expected 'rows cols' header", lineno, header.empty() ? 1 : header[0].second);
    int dims[2];
    for (int k = 0; k < 2; ++k) {
        const auto& [tok, col] = header[static_cast<std::size_t>(k)];
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), dims[k]);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || dims[k] <= 0)
            throw ParseError("bad dimension '" + tok + "'", lineno, col);
    }

    Matrix m(dims[0], dims[1]);
    for (int i = 0; i < dims[0]; ++i) {
        if (!next_data_line())
            throw ParseError("expected " + std::to_string(dims[0]) + " rows, got " + std::to_string(i),
                             lineno + 1, 1);
        auto toks = detail::tokenize(line);
        if (static_cast<int>(toks.size()) != dims[1])
            throw ParseError("expected " + std::to_string(dims[1]) + " entries in row, got " +
                                 std::to_string(toks.size()),
                             lineno, toks.empty() ? 1 : toks.back().second);
        for (int j = 0; j < dims[1]; ++j) {
            const auto& [tok, col] = toks[static_cast<std::size_t>(j)];
            double v = 0.0;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                throw ParseError("bad number '" + tok + "'", lineno, col);
            if (!std::isfinite(v)) throw ParseError("entry is not finite", lineno, col);
            m(i, j) = v;
        }
    }
    return m;
}

inline std::string to_text(const Matrix& m) {
    std::ostringstream os;
    write_matrix(os, m);
    return os.str();
}

inline Matrix from_text(const std::string& text) {
    std::istringstream is(text);
    return read_matrix(is);
}

}  // namespace netgain
