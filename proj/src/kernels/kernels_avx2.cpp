// AVX2 backend. One 4-lane register plays the role of the scalar backend's
// four interleaved accumulators; horizontal merges reproduce the same
// (a0 + a2) + (a1 + a3) order and remainders run the scalar element ops, so
// results match the scalar backend bit for bit. Compiled with -mavx2 only
// (no FMA) and -ffp-contract=off to keep the per-element operation sequences
// identical.

#if defined(__x86_64__) || defined(_M_X64)

#include "kernel_table.hpp"

#include <cstdint>
#include <immintrin.h>
#include <limits>

namespace cpca::kernels::detail {
namespace {

double hsum_blocked(__m256d acc) {
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d m = _mm_add_pd(lo, hi); // [a0+a2, a1+a3]
    return _mm_cvtsd_f64(m) + _mm_cvtsd_f64(_mm_unpackhi_pd(m, m));
}

double hmax_blocked(__m256d acc) {
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d m = _mm_max_pd(lo, hi); // [max(a0,a2), max(a1,a3)]
    const double m02 = _mm_cvtsd_f64(m);
    const double m13 = _mm_cvtsd_f64(_mm_unpackhi_pd(m, m));
    return m02 < m13 ? m13 : m02;
}

__m256d exp4(__m256d x) {
    const __m256d px = _mm256_floor_pd(
        _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(kExpLog2e), x),
                      _mm256_set1_pd(0.5)));
    const __m128i n32 = _mm256_cvtpd_epi32(px);
    __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(px, _mm256_set1_pd(kExpC1)));
    r = _mm256_sub_pd(r, _mm256_mul_pd(px, _mm256_set1_pd(kExpC2)));
    const __m256d xx = _mm256_mul_pd(r, r);
    __m256d p = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(kExpP0), xx),
                              _mm256_set1_pd(kExpP1));
    p = _mm256_add_pd(_mm256_mul_pd(p, xx), _mm256_set1_pd(kExpP2));
    p = _mm256_mul_pd(r, p);
    __m256d q = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(kExpQ0), xx),
                              _mm256_set1_pd(kExpQ1));
    q = _mm256_add_pd(_mm256_mul_pd(q, xx), _mm256_set1_pd(kExpQ2));
    q = _mm256_add_pd(_mm256_mul_pd(q, xx), _mm256_set1_pd(kExpQ3));
    __m256d y = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    y = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(y, y));

    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i bits =
        _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    __m256d result = _mm256_mul_pd(y, _mm256_castsi256_pd(bits));

    const __m256d over = _mm256_cmp_pd(x, _mm256_set1_pd(kExpOverflow), _CMP_GT_OQ);
    const __m256d under = _mm256_cmp_pd(x, _mm256_set1_pd(kExpUnderflow), _CMP_LT_OQ);
    const __m256d unord = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    result = _mm256_blendv_pd(
        result, _mm256_set1_pd(std::numeric_limits<double>::infinity()), over);
    result = _mm256_blendv_pd(result, _mm256_setzero_pd(), under);
    result = _mm256_blendv_pd(result, x, unord);
    return result;
}

double reduce_sum_base(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum_blocked(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double reduce_sum_impl(const double* x, std::size_t n) {
    if (n <= kPairwiseBase) return reduce_sum_base(x, n);
    const std::size_t mid = pairwise_split(n);
    return reduce_sum_impl(x, mid) + reduce_sum_impl(x + mid, n - mid);
}

double reduce_max_impl(const double* x, std::size_t n) {
    __m256d acc = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    double m = hmax_blocked(acc);
    for (; i < n; ++i) m = m < x[i] ? x[i] : m;
    return m;
}

double dot_base(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(
            acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    double s = hsum_blocked(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double dot_impl(const double* x, const double* y, std::size_t n) {
    if (n <= kPairwiseBase) return dot_base(x, y, n);
    const std::size_t mid = pairwise_split(n);
    return dot_impl(x, y, mid) + dot_impl(x + mid, y + mid, n - mid);
}

double weighted_shifted_sum_base(const double* v, const double* w, double shift,
                                 std::size_t n) {
    const __m256d sh = _mm256_set1_pd(shift);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(v + i), sh);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), t));
    }
    double s = hsum_blocked(acc);
    for (; i < n; ++i) s += w[i] * (v[i] - shift);
    return s;
}

double weighted_shifted_sum_impl(const double* v, const double* w, double shift,
                                 std::size_t n) {
    if (n <= kPairwiseBase) return weighted_shifted_sum_base(v, w, shift, n);
    const std::size_t mid = pairwise_split(n);
    return weighted_shifted_sum_impl(v, w, shift, mid) +
           weighted_shifted_sum_impl(v + mid, w + mid, shift, n - mid);
}

double weighted_centered_dot_base(const double* x, const double* y, const double* w,
                                  double cx, double cy, std::size_t n) {
    const __m256d vcx = _mm256_set1_pd(cx);
    const __m256d vcy = _mm256_set1_pd(cy);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d tx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vcx);
        const __m256d ty = _mm256_sub_pd(_mm256_loadu_pd(y + i), vcy);
        acc = _mm256_add_pd(
            acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(tx, ty)));
    }
    double s = hsum_blocked(acc);
    for (; i < n; ++i) s += w[i] * ((x[i] - cx) * (y[i] - cy));
    return s;
}

double weighted_centered_dot_impl(const double* x, const double* y, const double* w,
                                  double cx, double cy, std::size_t n) {
    if (n <= kPairwiseBase) return weighted_centered_dot_base(x, y, w, cx, cy, n);
    const std::size_t mid = pairwise_split(n);
    return weighted_centered_dot_impl(x, y, w, cx, cy, mid) +
           weighted_centered_dot_impl(x + mid, y + mid, w + mid, cx, cy, n - mid);
}

void exp_shifted_impl(const double* x, double shift, double* out, std::size_t n) {
    const __m256d sh = _mm256_set1_pd(shift);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, exp4(_mm256_sub_pd(_mm256_loadu_pd(x + i), sh)));
    }
    for (; i < n; ++i) out[i] = exp_core_scalar(x[i] - shift);
}

void scale_impl(double* x, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
    }
    for (; i < n; ++i) x[i] *= s;
}

void axpy_shifted_impl(const double* x, double coeff, double shift, double* out,
                       std::size_t n) {
    const __m256d vc = _mm256_set1_pd(coeff);
    const __m256d sh = _mm256_set1_pd(shift);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(x + i), sh);
        _mm256_storeu_pd(out + i,
                         _mm256_add_pd(_mm256_loadu_pd(out + i), _mm256_mul_pd(vc, t)));
    }
    for (; i < n; ++i) out[i] += coeff * (x[i] - shift);
}

void quartic_accum_impl(const double* x, double b, double d, double amp, double* e,
                        std::size_t n) {
    const double b2 = b * b;
    const double c = amp / (b2 * b2);
    const __m256d vb2 = _mm256_set1_pd(b2);
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vd = _mm256_set1_pd(d);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(x + i), vd);
        const __m256d q = _mm256_sub_pd(_mm256_mul_pd(t, t), vb2);
        const __m256d term = _mm256_mul_pd(vc, _mm256_mul_pd(q, q));
        _mm256_storeu_pd(e + i, _mm256_add_pd(_mm256_loadu_pd(e + i), term));
    }
    for (; i < n; ++i) {
        const double t = x[i] - d;
        const double q = t * t - b2;
        e[i] += c * (q * q);
    }
}

void shifted_sq_accum_impl(const double* x, double center, double coeff, double* e,
                           std::size_t n) {
    const __m256d vc = _mm256_set1_pd(coeff);
    const __m256d vcen = _mm256_set1_pd(center);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(x + i), vcen);
        const __m256d term = _mm256_mul_pd(vc, _mm256_mul_pd(t, t));
        _mm256_storeu_pd(e + i, _mm256_add_pd(_mm256_loadu_pd(e + i), term));
    }
    for (; i < n; ++i) {
        const double t = x[i] - center;
        e[i] += coeff * (t * t);
    }
}

void coupling_accum_impl(const double* xa, const double* xb, double delta,
                         double khalf, double* e, std::size_t n) {
    const __m256d vdelta = _mm256_set1_pd(delta);
    const __m256d vk = _mm256_set1_pd(khalf);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d diff =
            _mm256_sub_pd(_mm256_loadu_pd(xa + i), _mm256_loadu_pd(xb + i));
        const __m256d t = _mm256_sub_pd(diff, vdelta);
        const __m256d term = _mm256_mul_pd(vk, _mm256_mul_pd(t, t));
        _mm256_storeu_pd(e + i, _mm256_add_pd(_mm256_loadu_pd(e + i), term));
    }
    for (; i < n; ++i) {
        const double t = (xa[i] - xb[i]) - delta;
        e[i] += khalf * (t * t);
    }
}

constexpr KernelTable kAvx2Table = {
    reduce_sum_impl,
    reduce_max_impl,
    dot_impl,
    weighted_shifted_sum_impl,
    weighted_centered_dot_impl,
    exp_shifted_impl,
    scale_impl,
    axpy_shifted_impl,
    quartic_accum_impl,
    shifted_sq_accum_impl,
    coupling_accum_impl,
};

} // namespace

const KernelTable* avx2_table() {
    return __builtin_cpu_supports("avx2") ? &kAvx2Table : nullptr;
}

} // namespace cpca::kernels::detail

#endif // x86_64
