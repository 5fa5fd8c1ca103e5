#pragma once

// Data-parallel inner loops used by the SVR solver and predictor.
//
// Each routine has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active variant is picked once at startup from the CPU feature
// bits and can be overridden with set_isa() or the SHIFTCAST_ISA environment
// variable ("scalar" or "avx2").
//
// Row kernels (gram_row_*, add_scaled_pair) vectorize across output elements
// and keep the per-element operation order of the scalar loop, so both
// variants produce bit-identical results. Reductions (dot, squared_distance,
// weighted_sum) reassociate and agree only to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace shiftcast::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Column-major view of an n x d block: element (row, col) at data[col * rows + row].
struct ColumnBlock {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    [[nodiscard]] const double* column(std::size_t c) const noexcept { return data + c * rows; }
};

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    double (*weighted_sum)(const double* w, const double* v, std::size_t n);
    // out[r] = sum_c block(r, c) * x[c]
    void (*gram_row_linear)(ColumnBlock block, const double* x, double* out);
    // out[r] = sum_c (block(r, c) - x[c])^2
    void (*gram_row_sqdist)(ColumnBlock block, const double* x, double* out);
    // g[k] += a * ra[k] + b * rb[k]
    void (*add_scaled_pair)(double* g, double a, const double* ra, double b, const double* rb,
                            std::size_t n);
};

[[nodiscard]] bool isa_supported(Isa isa) noexcept;
[[nodiscard]] Isa detected_isa() noexcept;
[[nodiscard]] Isa active_isa() noexcept;
/// Throws std::invalid_argument when the CPU cannot run `isa`.
void set_isa(Isa isa);
[[nodiscard]] const KernelTable& table(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double weighted_sum(std::span<const double> w, std::span<const double> v);
void gram_row_linear(ColumnBlock block, std::span<const double> x, std::span<double> out);
void gram_row_sqdist(ColumnBlock block, std::span<const double> x, std::span<double> out);
void add_scaled_pair(std::span<double> g, double a, std::span<const double> ra, double b,
                     std::span<const double> rb);

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

}  // namespace shiftcast::simd
