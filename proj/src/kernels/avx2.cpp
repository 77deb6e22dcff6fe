// Compiled with -mavx2 -mfma; only reached after the runtime CPU check.

#include "sparsebar/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace sparsebar::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m128i load_idx(const std::int32_t* idx) {
    return _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx));
}

RowSums row_sums_avx2(const std::int32_t* idx, const double* gp, const double* gn,
                      const double* xp, const double* xn, std::size_t n) {
    __m256d wsum = _mm256_setzero_pd();
    __m256d tsum = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m128i vi = load_idx(idx + k);
        const __m256d vp = _mm256_i32gather_pd(xp, vi, 8);
        const __m256d vn = _mm256_i32gather_pd(xn, vi, 8);
        const __m256d sp = _mm256_loadu_pd(gp + k);
        const __m256d sn = _mm256_loadu_pd(gn + k);
        wsum = _mm256_fmadd_pd(sp, vp, wsum);
        wsum = _mm256_fmadd_pd(sn, vn, wsum);
        tsum = _mm256_add_pd(tsum, _mm256_add_pd(sp, sn));
    }
    RowSums s{hsum(wsum), hsum(tsum)};
    for (; k < n; ++k) {
        const auto i = idx[k];
        s.weighted += gp[k] * xp[i] + gn[k] * xn[i];
        s.total += gp[k] + gn[k];
    }
    return s;
}

double row_dot_avx2(const std::int32_t* idx, const double* wp, const double* wn,
                    const double* xp, const double* xn, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m128i vi = load_idx(idx + k);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(wp + k), _mm256_i32gather_pd(xp, vi, 8), acc);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(wn + k), _mm256_i32gather_pd(xn, vi, 8), acc);
    }
    double s = hsum(acc);
    for (; k < n; ++k) s += wp[k] * xp[idx[k]] + wn[k] * xn[idx[k]];
    return s;
}

double row_branch_power_avx2(const std::int32_t* idx, const double* gp, const double* gn,
                             const double* xp, const double* xn, double v, std::size_t n) {
    const __m256d vv = _mm256_set1_pd(v);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m128i vi = load_idx(idx + k);
        const __m256d dp = _mm256_sub_pd(_mm256_i32gather_pd(xp, vi, 8), vv);
        const __m256d dn = _mm256_sub_pd(_mm256_i32gather_pd(xn, vi, 8), vv);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(gp + k), dp), dp, acc);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(gn + k), dn), dn, acc);
    }
    double s = hsum(acc);
    for (; k < n; ++k) {
        const double dp = xp[idx[k]] - v;
        const double dn = xn[idx[k]] - v;
        s += gp[k] * dp * dp + gn[k] * dn * dn;
    }
    return s;
}

void row_theta_grad_avx2(const std::int32_t* idx, const double* gp, const double* gn,
                         const double* xp, const double* xn, double center, double scale,
                         double lo, double hi, double* out_p, double* out_n, std::size_t n) {
    const double inv_span = 1.0 / (hi - lo);
    const __m256d vlo = _mm256_set1_pd(lo);
    const __m256d vhi = _mm256_set1_pd(hi);
    const __m256d vinv = _mm256_set1_pd(inv_span);
    const __m256d vc = _mm256_set1_pd(center);
    const __m256d vs = _mm256_set1_pd(scale);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m128i vi = load_idx(idx + k);
        const __m256d sp = _mm256_loadu_pd(gp + k);
        const __m256d sn = _mm256_loadu_pd(gn + k);
        const __m256d dp = _mm256_mul_pd(_mm256_mul_pd(_mm256_sub_pd(sp, vlo), _mm256_sub_pd(vhi, sp)), vinv);
        const __m256d dn = _mm256_mul_pd(_mm256_mul_pd(_mm256_sub_pd(sn, vlo), _mm256_sub_pd(vhi, sn)), vinv);
        const __m256d ep = _mm256_mul_pd(vs, _mm256_sub_pd(_mm256_i32gather_pd(xp, vi, 8), vc));
        const __m256d en = _mm256_mul_pd(vs, _mm256_sub_pd(_mm256_i32gather_pd(xn, vi, 8), vc));
        _mm256_storeu_pd(out_p + k, _mm256_mul_pd(ep, dp));
        _mm256_storeu_pd(out_n + k, _mm256_mul_pd(en, dn));
    }
    for (; k < n; ++k) {
        const auto i = idx[k];
        const double dp = (gp[k] - lo) * (hi - gp[k]) * inv_span;
        const double dn = (gn[k] - lo) * (hi - gn[k]) * inv_span;
        out_p[k] = scale * (xp[i] - center) * dp;
        out_n[k] = scale * (xn[i] - center) * dn;
    }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4)
        _mm256_storeu_pd(y + k, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
    for (; k < n; ++k) y[k] += a * x[k];
}

constexpr KernelTable kAvx2{
    row_sums_avx2, row_dot_avx2, row_branch_power_avx2, row_theta_grad_avx2, axpy_avx2,
};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2; }

}  // namespace sparsebar::kernels

#else

namespace sparsebar::kernels {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace sparsebar::kernels

#endif
