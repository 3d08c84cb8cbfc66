#include "clockforge/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "clockforge/common.hpp"

namespace clockforge::kernels {

namespace {

bool cpu_has_avx2() {
#if CLOCKFORGE_HAVE_AVX2
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_backend() {
    if (const char* env = std::getenv("CLOCKFORGE_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::Avx2;
    }
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const detail::Ops*>& current_ops() {
    static std::atomic<const detail::Ops*> ops = [] {
#if CLOCKFORGE_HAVE_AVX2
        if (detect_backend() == Backend::Avx2) return &detail::avx2_ops();
#endif
        return &detail::scalar_ops();
    }();
    return ops;
}

std::atomic<Backend>& current_backend() {
    static std::atomic<Backend> b = detect_backend();
    return b;
}

}  // namespace

Backend active_backend() { return current_backend().load(); }

bool backend_available(Backend b) {
    if (b == Backend::Scalar) return true;
    return cpu_has_avx2();
}

const char* backend_name(Backend b) {
    return b == Backend::Scalar ? "scalar" : "avx2";
}

void set_backend(Backend b) {
    if (!backend_available(b))
        throw InvalidArgument("kernel backend not available on this host");
#if CLOCKFORGE_HAVE_AVX2
    current_ops().store(b == Backend::Avx2 ? &detail::avx2_ops() : &detail::scalar_ops());
#else
    current_ops().store(&detail::scalar_ops());
#endif
    current_backend().store(b);
}

void probs_from_weights(const double* wre, const double* wim, std::size_t n_out,
                        std::size_t dim, const double* pre, const double* pim, double* out) {
    current_ops().load()->probs_from_weights(wre, wim, n_out, dim, pre, pim, out);
}

void ar1_advance(double* x, const double* decay, const double* amp, const double* noise,
                 std::size_t n) {
    current_ops().load()->ar1_advance(x, decay, amp, noise, n);
}

double weighted_sum(const double* w, const double* a, std::size_t n) {
    return current_ops().load()->weighted_sum(w, a, n);
}

double weighted_sum2(const double* w, const double* a, const double* b, std::size_t n) {
    return current_ops().load()->weighted_sum2(w, a, b, n);
}

}  // namespace clockforge::kernels
