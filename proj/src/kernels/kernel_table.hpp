#pragma once

#include <cstddef>

namespace cpca::kernels::detail {

// One function pointer per kernel; the dispatcher swaps whole tables.
struct KernelTable {
    double (*reduce_sum)(const double*, std::size_t);
    double (*reduce_max)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*weighted_shifted_sum)(const double*, const double*, double, std::size_t);
    double (*weighted_centered_dot)(const double*, const double*, const double*,
                                    double, double, std::size_t);
    void (*exp_shifted)(const double*, double, double*, std::size_t);
    void (*scale)(double*, double, std::size_t);
    void (*axpy_shifted)(const double*, double, double, double*, std::size_t);
    void (*quartic_accum)(const double*, double, double, double, double*, std::size_t);
    void (*shifted_sq_accum)(const double*, double, double, double*, std::size_t);
    void (*coupling_accum)(const double*, const double*, double, double, double*,
                           std::size_t);
};

const KernelTable& scalar_table();
// nullptr when the build or the CPU lacks AVX2.
const KernelTable* avx2_table();

// Shared by both backends: AVX2 loops fall back to it for remainder lanes.
double exp_core_scalar(double x);

// Summing reductions follow a fixed pairwise tree: ranges of at most
// kPairwiseBase elements are folded with the 4-accumulator base pattern,
// longer ranges split at the largest power of two below n and the two
// halves' results are added. The tree keeps rounding error growing with
// log(n) rather than n (a 5e5-term weight sum must stay within 1e-12 of 1),
// and both backends walk the identical tree.
inline constexpr std::size_t kPairwiseBase = 64;

inline std::size_t pairwise_split(std::size_t n) {
    std::size_t mid = 1;
    while (mid * 2 < n) {
        mid *= 2;
    }
    return mid;
}

// Cephes-style exp: exp(x) = 2^n * (1 + 2*p/(q - p)) with p = r*P(r^2),
// q = Q(r^2), r = x - n*ln2 (split into C1 + C2). Scalar and AVX2 backends
// must apply these constants with the same operation order.
inline constexpr double kExpLog2e = 1.4426950408889634073599;
inline constexpr double kExpC1 = 6.93145751953125e-1;
inline constexpr double kExpC2 = 1.42860682030941723212e-6;
inline constexpr double kExpP0 = 1.26177193074810590878e-4;
inline constexpr double kExpP1 = 3.02994407707441961300e-2;
inline constexpr double kExpP2 = 9.99999999999999999910e-1;
inline constexpr double kExpQ0 = 3.00198505138664455042e-6;
inline constexpr double kExpQ1 = 2.52448340349684104192e-3;
inline constexpr double kExpQ2 = 2.27265548208155028766e-1;
inline constexpr double kExpQ3 = 2.00000000000000000005e0;
inline constexpr double kExpOverflow = 709.43;
inline constexpr double kExpUnderflow = -708.39;

} // namespace cpca::kernels::detail
