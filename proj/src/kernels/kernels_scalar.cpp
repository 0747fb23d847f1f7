// Scalar reference backend. Reduction base blocks keep four stride-interleaved
// partial accumulators merged as (a0 + a2) + (a1 + a3) with the remainder
// folded in last, which is exactly the shape the AVX2 backend produces from
// one 4-lane register; longer ranges recurse over the pairwise tree declared
// in kernel_table.hpp. That shared order is what makes the backends
// bit-identical.

#include "kernel_table.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace cpca::kernels::detail {

double exp_core_scalar(double x) {
    if (std::isnan(x)) return x;
    if (x > kExpOverflow) return std::numeric_limits<double>::infinity();
    if (x < kExpUnderflow) return 0.0;
    const double px = std::floor(kExpLog2e * x + 0.5);
    const auto n = static_cast<std::int64_t>(px);
    double r = x - px * kExpC1;
    r -= px * kExpC2;
    const double xx = r * r;
    const double p = r * ((kExpP0 * xx + kExpP1) * xx + kExpP2);
    const double q = ((kExpQ0 * xx + kExpQ1) * xx + kExpQ2) * xx + kExpQ3;
    double y = p / (q - p);
    y = 1.0 + (y + y);
    const auto bits = static_cast<std::uint64_t>(n + 1023) << 52;
    return y * std::bit_cast<double>(bits);
}

namespace {

double reduce_sum_base(const double* x, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += x[i];
        a1 += x[i + 1];
        a2 += x[i + 2];
        a3 += x[i + 3];
    }
    double s = (a0 + a2) + (a1 + a3);
    for (; i < n; ++i) s += x[i];
    return s;
}

double reduce_sum_impl(const double* x, std::size_t n) {
    if (n <= kPairwiseBase) return reduce_sum_base(x, n);
    const std::size_t mid = pairwise_split(n);
    return reduce_sum_impl(x, mid) + reduce_sum_impl(x + mid, n - mid);
}

double reduce_max_impl(const double* x, std::size_t n) {
    const double lowest = -std::numeric_limits<double>::infinity();
    double a0 = lowest, a1 = lowest, a2 = lowest, a3 = lowest;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 = a0 < x[i] ? x[i] : a0;
        a1 = a1 < x[i + 1] ? x[i + 1] : a1;
        a2 = a2 < x[i + 2] ? x[i + 2] : a2;
        a3 = a3 < x[i + 3] ? x[i + 3] : a3;
    }
    const double m02 = a0 < a2 ? a2 : a0;
    const double m13 = a1 < a3 ? a3 : a1;
    double m = m02 < m13 ? m13 : m02;
    for (; i < n; ++i) m = m < x[i] ? x[i] : m;
    return m;
}

double dot_base(const double* x, const double* y, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += x[i] * y[i];
        a1 += x[i + 1] * y[i + 1];
        a2 += x[i + 2] * y[i + 2];
        a3 += x[i + 3] * y[i + 3];
    }
    double s = (a0 + a2) + (a1 + a3);
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
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += w[i] * (v[i] - shift);
        a1 += w[i + 1] * (v[i + 1] - shift);
        a2 += w[i + 2] * (v[i + 2] - shift);
        a3 += w[i + 3] * (v[i + 3] - shift);
    }
    double s = (a0 + a2) + (a1 + a3);
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
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += w[i] * ((x[i] - cx) * (y[i] - cy));
        a1 += w[i + 1] * ((x[i + 1] - cx) * (y[i + 1] - cy));
        a2 += w[i + 2] * ((x[i + 2] - cx) * (y[i + 2] - cy));
        a3 += w[i + 3] * ((x[i + 3] - cx) * (y[i + 3] - cy));
    }
    double s = (a0 + a2) + (a1 + a3);
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
    for (std::size_t i = 0; i < n; ++i) out[i] = exp_core_scalar(x[i] - shift);
}

void scale_impl(double* x, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

void axpy_shifted_impl(const double* x, double coeff, double shift, double* out,
                       std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += coeff * (x[i] - shift);
}

void quartic_accum_impl(const double* x, double b, double d, double amp, double* e,
                        std::size_t n) {
    const double b2 = b * b;
    const double c = amp / (b2 * b2);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x[i] - d;
        const double q = t * t - b2;
        e[i] += c * (q * q);
    }
}

void shifted_sq_accum_impl(const double* x, double center, double coeff, double* e,
                           std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x[i] - center;
        e[i] += coeff * (t * t);
    }
}

void coupling_accum_impl(const double* xa, const double* xb, double delta,
                         double khalf, double* e, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (xa[i] - xb[i]) - delta;
        e[i] += khalf * (t * t);
    }
}

constexpr KernelTable kScalarTable = {
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

const KernelTable& scalar_table() { return kScalarTable; }

} // namespace cpca::kernels::detail
