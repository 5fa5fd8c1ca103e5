#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "shiftcast/matrix.hpp"
#include "shiftcast/simd/kernels.hpp"
#include "shiftcast/svr/svr.hpp"

namespace shiftcast::svr::detail {

/// Computes kernel rows k(x_i, .) against a fixed column-major sample block.
class KernelRows {
public:
    KernelRows(const KernelSpec& kernel, const Matrix& block)
        : kernel_(kernel), columns_(block.column_major()), rows_(block.rows()),
          cols_(block.cols()) {}

    KernelRows(const KernelSpec& kernel, std::vector<double> columns, std::size_t rows,
               std::size_t cols)
        : kernel_(kernel), columns_(std::move(columns)), rows_(rows), cols_(cols) {}

    [[nodiscard]] std::size_t size() const noexcept { return rows_; }

    /// out[r] = k(block_r, x)
    void compute(std::span<const double> x, std::span<double> out) const {
        const simd::ColumnBlock view{columns_.data(), rows_, cols_};
        if (kernel_.variant() == KernelVariant::Linear) {
            simd::gram_row_linear(view, x, out);
            return;
        }
        simd::gram_row_sqdist(view, x, out);
        const double gamma = kernel_.gamma();
        for (double& v : out) {
            v = std::exp(-gamma * v);
        }
    }

private:
    KernelSpec kernel_;
    std::vector<double> columns_;
    std::size_t rows_;
    std::size_t cols_;
};

/// Training-set Gram matrix: fully cached up to kKernelCacheLimit rows,
/// otherwise rows are recomputed on demand into caller-provided buffers.
class GramMatrix {
public:
    GramMatrix(const KernelSpec& kernel, const Matrix& xs)
        : xs_(xs), rows_(kernel, xs), cached_(xs.rows() <= kKernelCacheLimit) {
        const std::size_t n = xs.rows();
        diagonal_.resize(n);
        if (cached_) {
            full_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i) {
                rows_.compute(xs.row(i), std::span<double>(full_.data() + i * n, n));
                diagonal_[i] = full_[i * n + i];
            }
        } else {
            std::vector<double> scratch(n);
            for (std::size_t i = 0; i < n; ++i) {
                rows_.compute(xs.row(i), scratch);
                diagonal_[i] = scratch[i];
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return diagonal_.size(); }
    [[nodiscard]] bool cached() const noexcept { return cached_; }
    [[nodiscard]] double diagonal(std::size_t i) const noexcept { return diagonal_[i]; }

    std::span<const double> row(std::size_t i, std::vector<double>& buffer) const {
        const std::size_t n = size();
        if (cached_) {
            return {full_.data() + i * n, n};
        }
        buffer.resize(n);
        rows_.compute(xs_.row(i), buffer);
        return buffer;
    }

private:
    const Matrix& xs_;
    KernelRows rows_;
    bool cached_;
    std::vector<double> diagonal_;
    std::vector<double> full_;
};

}  // namespace shiftcast::svr::detail
