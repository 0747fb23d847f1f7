#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace cpca::kernels {

// Data-parallel inner loops used by the reweighting, composition, and
// quadrature stages. Every kernel has a scalar reference implementation and
// an AVX2 variant selected at runtime; both follow the same accumulation
// order, so the two backends produce bit-identical results and the
// equivalence suite asserts exact equality. Summing reductions walk a fixed
// pairwise tree (64-element base blocks of 4 stride-interleaved partials
// merged as (s0+s2)+(s1+s3) with the tail appended last, halves split at the
// largest power of two below n), which keeps rounding error logarithmic in n
// and results independent of threading or chunking upstream.

enum class Backend { scalar, avx2 };

Backend active_backend();
bool backend_supported(Backend b);
// Throws InputError if the backend is not supported on this CPU/build.
void set_backend(Backend b);
std::string backend_name(Backend b);

// --- reductions -----------------------------------------------------------

double reduce_sum(std::span<const double> x);
double reduce_max(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);

// sum_i w[i] * (v[i] - shift)
double weighted_shifted_sum(std::span<const double> v,
                            std::span<const double> w, double shift);

// sum_i w[i] * (x[i] - cx) * (y[i] - cy)
double weighted_centered_dot(std::span<const double> x,
                             std::span<const double> y,
                             std::span<const double> w, double cx, double cy);

// --- elementwise ------------------------------------------------------------

// out[i] = exp(x[i] - shift). Arguments above ~709.4 give +inf, below
// ~-708.4 give 0. Both backends use the same polynomial core (exp_core),
// never libm, so results are bit-identical across backends.
void exp_shifted(std::span<const double> x, double shift, std::span<double> out);

void scale(std::span<double> x, double s);

// out[i] += coeff * (x[i] - shift)
void axpy_shifted(std::span<const double> x, double coeff, double shift,
                  std::span<double> out);

// --- energy accumulators (SoA columns) -------------------------------------

// e[i] += (amp/b^4) * ((x[i]-d)^2 - b^2)^2
void quartic_accum(std::span<const double> x, double b, double d, double amp,
                   std::span<double> e);

// e[i] += coeff * (x[i] - center)^2   (kinetic terms, harmonic wells,
// coupling against a frozen neighbour)
void shifted_sq_accum(std::span<const double> x, double center, double coeff,
                      std::span<double> e);

// e[i] += khalf * (xa[i] - xb[i] - delta)^2
void coupling_accum(std::span<const double> xa, std::span<const double> xb,
                    double delta, double khalf, std::span<double> e);

// Scalar-reference exp used by the scalar backend and tests; identical
// operation sequence to the AVX2 lane computation.
double exp_core(double x);

} // namespace cpca::kernels
