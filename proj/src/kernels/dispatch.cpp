#include "cpca/kernels.hpp"

#include "cpca/errors.hpp"
#include "kernel_table.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace cpca::kernels {
namespace {

using detail::KernelTable;

const KernelTable* select_default() {
    if (const char* env = std::getenv("CPCA_BACKEND")) {
        const std::string name(env);
        if (name == "scalar") return &detail::scalar_table();
        if (name == "avx2") {
            if (const KernelTable* t = detail::avx2_table()) return t;
            throw InputError("CPCA_BACKEND=avx2 requested but AVX2 is unavailable");
        }
        if (!name.empty()) throw InputError("unknown CPCA_BACKEND value: " + name);
    }
    if (const KernelTable* t = detail::avx2_table()) return t;
    return &detail::scalar_table();
}

std::atomic<const KernelTable*>& table_slot() {
    static std::atomic<const KernelTable*> slot{select_default()};
    return slot;
}

const KernelTable& table() { return *table_slot().load(std::memory_order_relaxed); }

void check_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw InputError(std::string(what) + ": size mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

} // namespace

Backend active_backend() {
    return &table() == &detail::scalar_table() ? Backend::scalar : Backend::avx2;
}

bool backend_supported(Backend b) {
    return b == Backend::scalar || detail::avx2_table() != nullptr;
}

void set_backend(Backend b) {
    if (b == Backend::scalar) {
        table_slot().store(&detail::scalar_table(), std::memory_order_relaxed);
        return;
    }
    const KernelTable* t = detail::avx2_table();
    if (t == nullptr) throw InputError("AVX2 backend is unavailable on this machine");
    table_slot().store(t, std::memory_order_relaxed);
}

std::string backend_name(Backend b) {
    return b == Backend::scalar ? "scalar" : "avx2";
}

double reduce_sum(std::span<const double> x) {
    return table().reduce_sum(x.data(), x.size());
}

double reduce_max(std::span<const double> x) {
    return table().reduce_max(x.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
    check_same_size(x.size(), y.size(), "dot");
    return table().dot(x.data(), y.data(), x.size());
}

double weighted_shifted_sum(std::span<const double> v, std::span<const double> w,
                            double shift) {
    check_same_size(v.size(), w.size(), "weighted_shifted_sum");
    return table().weighted_shifted_sum(v.data(), w.data(), shift, v.size());
}

double weighted_centered_dot(std::span<const double> x, std::span<const double> y,
                             std::span<const double> w, double cx, double cy) {
    check_same_size(x.size(), y.size(), "weighted_centered_dot");
    check_same_size(x.size(), w.size(), "weighted_centered_dot");
    return table().weighted_centered_dot(x.data(), y.data(), w.data(), cx, cy,
                                         x.size());
}

void exp_shifted(std::span<const double> x, double shift, std::span<double> out) {
    check_same_size(x.size(), out.size(), "exp_shifted");
    table().exp_shifted(x.data(), shift, out.data(), x.size());
}

void scale(std::span<double> x, double s) { table().scale(x.data(), s, x.size()); }

void axpy_shifted(std::span<const double> x, double coeff, double shift,
                  std::span<double> out) {
    check_same_size(x.size(), out.size(), "axpy_shifted");
    table().axpy_shifted(x.data(), coeff, shift, out.data(), x.size());
}

void quartic_accum(std::span<const double> x, double b, double d, double amp,
                   std::span<double> e) {
    check_same_size(x.size(), e.size(), "quartic_accum");
    table().quartic_accum(x.data(), b, d, amp, e.data(), x.size());
}

void shifted_sq_accum(std::span<const double> x, double center, double coeff,
                      std::span<double> e) {
    check_same_size(x.size(), e.size(), "shifted_sq_accum");
    table().shifted_sq_accum(x.data(), center, coeff, e.data(), x.size());
}

void coupling_accum(std::span<const double> xa, std::span<const double> xb,
                    double delta, double khalf, std::span<double> e) {
    check_same_size(xa.size(), xb.size(), "coupling_accum");
    check_same_size(xa.size(), e.size(), "coupling_accum");
    table().coupling_accum(xa.data(), xb.data(), delta, khalf, e.data(), xa.size());
}

double exp_core(double x) { return detail::exp_core_scalar(x); }

} // namespace cpca::kernels

#if !(defined(__x86_64__) || defined(_M_X64))
namespace cpca::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
} // namespace cpca::kernels::detail
#endif
