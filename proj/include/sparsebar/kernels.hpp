#pragma once

// Inner-loop kernels over one packed crossbar row.
//
// A row stores only its present entries: idx[k] is the (extended) input
// column of entry k, and per-entry values live in parallel arrays. Inputs
// are gathered through idx. Every kernel has a scalar reference version and
// an AVX2/FMA version; the public entry points dispatch at runtime.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace sparsebar::kernels {

enum class Isa { scalar, avx2 };

struct RowSums {
    double weighted = 0.0;  // sum_k gp[k]*xp[idx[k]] + gn[k]*xn[idx[k]]
    double total = 0.0;     // sum_k gp[k] + gn[k]
};

// Signature table shared by every implementation.
struct KernelTable {
    RowSums (*row_sums)(const std::int32_t* idx, const double* gp, const double* gn,
                        const double* xp, const double* xn, std::size_t n);
    double (*row_dot)(const std::int32_t* idx, const double* wp, const double* wn,
                      const double* xp, const double* xn, std::size_t n);
    // sum_k gp[k]*(xp[idx[k]] - v)^2 + gn[k]*(xn[idx[k]] - v)^2
    double (*row_branch_power)(const std::int32_t* idx, const double* gp, const double* gn,
                               const double* xp, const double* xn, double v, std::size_t n);
    // Gradient of one row's pre-activation w.r.t. its conductances, chained
    // into the logistic range map:
    //   out_p[k] = scale * (xp[idx[k]] - center) * (gp[k]-lo)*(hi-gp[k])/(hi-lo)
    // and likewise for the n side. center = net for the full normalizer
    // Jacobian, 0 for the diagonal approximation.
    void (*row_theta_grad)(const std::int32_t* idx, const double* gp, const double* gn,
                           const double* xp, const double* xn, double center, double scale,
                           double lo, double hi, double* out_p, double* out_n, std::size_t n);
    // y[k] += a * x[k]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_table() noexcept;

// CPU check (AVX2 + FMA).
bool cpu_has_avx2() noexcept;

// Active ISA. Defaults to the best supported; SPARSEBAR_SIMD=scalar in the
// environment forces the reference kernels.
Isa active_isa() noexcept;
// Returns false (and changes nothing) when the ISA is unavailable.
bool set_isa(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

const KernelTable& active() noexcept;

inline RowSums row_sums(const std::int32_t* idx, const double* gp, const double* gn,
                        const double* xp, const double* xn, std::size_t n) {
    return active().row_sums(idx, gp, gn, xp, xn, n);
}

inline double row_dot(const std::int32_t* idx, const double* wp, const double* wn,
                      const double* xp, const double* xn, std::size_t n) {
    return active().row_dot(idx, wp, wn, xp, xn, n);
}

inline double row_branch_power(const std::int32_t* idx, const double* gp, const double* gn,
                               const double* xp, const double* xn, double v, std::size_t n) {
    return active().row_branch_power(idx, gp, gn, xp, xn, v, n);
}

inline void row_theta_grad(const std::int32_t* idx, const double* gp, const double* gn,
                           const double* xp, const double* xn, double center, double scale,
                           double lo, double hi, double* out_p, double* out_n, std::size_t n) {
    active().row_theta_grad(idx, gp, gn, xp, xn, center, scale, lo, hi, out_p, out_n, n);
}

inline void axpy(double a, const double* x, double* y, std::size_t n) {
    active().axpy(a, x, y, n);
}

}  // namespace sparsebar::kernels
