#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace wotkit {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Dense n_x x n_y x m tensor, laid out so that the m-vector at (i, j) is
/// contiguous.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t rows, std::size_t cols, std::size_t depth, double fill = 0.0)
        : rows_(rows), cols_(cols), depth_(depth), data_(rows * cols * depth, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t depth() const { return depth_; }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        assert(i < rows_ && j < cols_ && k < depth_);
        return data_[(i * cols_ + j) * depth_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        assert(i < rows_ && j < cols_ && k < depth_);
        return data_[(i * cols_ + j) * depth_ + k];
    }

    std::span<const double> at(std::size_t i, std::size_t j) const {
        return {data_.data() + (i * cols_ + j) * depth_, depth_};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t depth_ = 0;
    std::vector<double> data_;
};

}  // namespace wotkit
