#include "sparsebar/kernels.hpp"

namespace sparsebar::kernels {
namespace {

RowSums row_sums_scalar(const std::int32_t* idx, const double* gp, const double* gn,
                        const double* xp, const double* xn, std::size_t n) {
    RowSums s;
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = idx[k];
        s.weighted += gp[k] * xp[i] + gn[k] * xn[i];
        s.total += gp[k] + gn[k];
    }
    return s;
}

double row_dot_scalar(const std::int32_t* idx, const double* wp, const double* wn,
                      const double* xp, const double* xn, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = idx[k];
        acc += wp[k] * xp[i] + wn[k] * xn[i];
    }
    return acc;
}

double row_branch_power_scalar(const std::int32_t* idx, const double* gp, const double* gn,
                               const double* xp, const double* xn, double v, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = idx[k];
        const double dp = xp[i] - v;
        const double dn = xn[i] - v;
        acc += gp[k] * dp * dp + gn[k] * dn * dn;
    }
    return acc;
}

void row_theta_grad_scalar(const std::int32_t* idx, const double* gp, const double* gn,
                           const double* xp, const double* xn, double center, double scale,
                           double lo, double hi, double* out_p, double* out_n, std::size_t n) {
    const double inv_span = 1.0 / (hi - lo);
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = idx[k];
        const double dp = (gp[k] - lo) * (hi - gp[k]) * inv_span;
        const double dn = (gn[k] - lo) * (hi - gn[k]) * inv_span;
        out_p[k] = scale * (xp[i] - center) * dp;
        out_n[k] = scale * (xn[i] - center) * dn;
    }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

constexpr KernelTable kScalar{
    row_sums_scalar, row_dot_scalar, row_branch_power_scalar, row_theta_grad_scalar, axpy_scalar,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace sparsebar::kernels
