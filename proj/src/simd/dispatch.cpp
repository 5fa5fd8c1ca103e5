#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "shiftcast/simd/kernels.hpp"

namespace shiftcast::simd {
namespace {

Isa initial_isa() noexcept {
    if (const char* env = std::getenv("SHIFTCAST_ISA"); env != nullptr) {
        const std::string_view requested{env};
        if (requested == "scalar") {
            return Isa::Scalar;
        }
        if (requested == "avx2" && isa_supported(Isa::Avx2)) {
            return Isa::Avx2;
        }
    }
    return detected_isa();
}

std::atomic<Isa>& active_slot() noexcept {
    static std::atomic<Isa> slot{initial_isa()};
    return slot;
}

const KernelTable& active() { return table(active_slot().load(std::memory_order_relaxed)); }

void require_same_size(std::size_t a, std::size_t b) {
    if (a != b) {
        throw std::invalid_argument("simd: operand lengths differ (" + std::to_string(a) + " vs " +
                                    std::to_string(b) + ")");
    }
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
    }
    return false;
}

Isa detected_isa() noexcept { return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() noexcept { return active_slot().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::invalid_argument("simd: " + std::string(to_string(isa)) +
                                    " is not supported on this CPU");
    }
    active_slot().store(isa, std::memory_order_relaxed);
}

const KernelTable& table(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return detail::scalar_table();
        case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            if (isa_supported(Isa::Avx2)) {
                return detail::avx2_table();
            }
#endif
            break;
    }
    throw std::invalid_argument("simd: " + std::string(to_string(isa)) + " is not available");
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size());
    return active().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size());
    return active().squared_distance(a.data(), b.data(), a.size());
}

double weighted_sum(std::span<const double> w, std::span<const double> v) {
    require_same_size(w.size(), v.size());
    return active().weighted_sum(w.data(), v.data(), w.size());
}

void gram_row_linear(ColumnBlock block, std::span<const double> x, std::span<double> out) {
    require_same_size(block.cols, x.size());
    require_same_size(block.rows, out.size());
    active().gram_row_linear(block, x.data(), out.data());
}

void gram_row_sqdist(ColumnBlock block, std::span<const double> x, std::span<double> out) {
    require_same_size(block.cols, x.size());
    require_same_size(block.rows, out.size());
    active().gram_row_sqdist(block, x.data(), out.data());
}

void add_scaled_pair(std::span<double> g, double a, std::span<const double> ra, double b,
                     std::span<const double> rb) {
    require_same_size(g.size(), ra.size());
    require_same_size(g.size(), rb.size());
    active().add_scaled_pair(g.data(), a, ra.data(), b, rb.data(), g.size());
}

}  // namespace shiftcast::simd
