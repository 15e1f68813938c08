#include <immintrin.h>

#include <cmath>
#include <limits>

#include "cbm/kernels.hpp"

namespace cbm::kernels::avx2 {
namespace {

// exp(x) for x <= 0. Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2, then a
// degree-13 Taylor polynomial (truncation below 1e-17 relative) and an
// exponent-field scale by 2^n. Lanes below -708 flush to zero.
inline __m256d exp_nonpositive(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d floor_x = _mm256_set1_pd(-708.0);

    __m256d underflow = _mm256_cmp_pd(x, floor_x, _CMP_LT_OQ);
    x = _mm256_max_pd(x, floor_x);

    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    static constexpr double coeff[] = {
        1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
        1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
        1.0 / 6.0,          0.5,               1.0,              1.0};
    __m256d p = _mm256_set1_pd(coeff[0]);
    for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(coeff[i]));

    __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i n64 = _mm256_cvtepi32_epi64(n32);
    n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
    __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(n64, 52));
    __m256d result = _mm256_mul_pd(p, scale);
    return _mm256_andnot_pd(underflow, result);
}

inline double horizontal_sum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline double horizontal_max(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, swapped));
}

}  // namespace

double decayed_sum(std::span<const double> times, double s, double rate) noexcept {
    const std::size_t n = times.size();
    const double* t = times.data();
    const __m256d vs = _mm256_set1_pd(s);
    const __m256d vneg_rate = _mm256_set1_pd(-rate);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d lag = _mm256_sub_pd(vs, _mm256_loadu_pd(t + i));
        acc = _mm256_add_pd(acc, exp_nonpositive(_mm256_mul_pd(vneg_rate, lag)));
    }
    double total = horizontal_sum(acc);
    for (; i < n; ++i) total += std::exp(-rate * (s - t[i]));
    return total;
}

double add_and_max(std::span<double> levels, std::span<const double> increments) noexcept {
    const std::size_t n = levels.size();
    double* x = levels.data();
    const double* dx = increments.data();
    double best = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vbest = _mm256_set1_pd(best);
        for (; i + 4 <= n; i += 4) {
            __m256d v = _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(dx + i));
            _mm256_storeu_pd(x + i, v);
            vbest = _mm256_max_pd(vbest, v);
        }
        best = horizontal_max(vbest);
    }
    for (; i < n; ++i) {
        x[i] += dx[i];
        if (x[i] > best) best = x[i];
    }
    return best;
}

std::size_t count_at_or_above(std::span<const double> values, double threshold) noexcept {
    const std::size_t n = values.size();
    const double* v = values.data();
    const __m256d vt = _mm256_set1_pd(threshold);
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(v + i), vt, _CMP_GE_OQ));
        count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
    }
    for (; i < n; ++i) count += (v[i] >= threshold) ? 1 : 0;
    return count;
}

}  // namespace cbm::kernels::avx2
