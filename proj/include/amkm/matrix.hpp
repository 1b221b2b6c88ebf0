#pragma once

#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace amkm {

/// Dense row-major matrix of doubles. Rows are contiguous so hot loops can
/// hand them to the simd kernels as raw spans.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), data_(std::move(values)) {
        if (data_.size() != rows * cols) {
            throw std::invalid_argument("Matrix: value count does not match rows*cols");
        }
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m;
        m.rows_ = rows.size();
        m.cols_ = rows.size() ? rows.begin()->size() : 0;
        m.data_.reserve(m.rows_ * m.cols_);
        for (const auto& r : rows) {
            if (r.size() != m.cols_) {
                throw std::invalid_argument("Matrix::from_rows: ragged rows");
            }
            m.data_.insert(m.data_.end(), r.begin(), r.end());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<double> row(std::size_t r) {
        assert(r < rows_);
        return {data_.data() + r * cols_, cols_};
    }
    std::span<const double> row(std::size_t r) const {
        assert(r < rows_);
        return {data_.data() + r * cols_, cols_};
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    /// Gather a copy of the given rows, in the given order.
    Matrix take_rows(std::span<const std::size_t> indices) const {
        Matrix out(indices.size(), cols_);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] >= rows_) {
                throw std::out_of_range("Matrix::take_rows: row index out of range");
            }
            auto src = row(indices[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    void append_rows(const Matrix& other) {
        if (other.cols_ != cols_ && rows_ != 0) {
            throw std::invalid_argument("Matrix::append_rows: column count mismatch");
        }
        if (rows_ == 0) cols_ = other.cols_;
        data_.insert(data_.end(), other.data_.begin(), other.data_.end());
        rows_ += other.rows_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace amkm
