#include <atomic>

#include "cbm/errors.hpp"
#include "cbm/kernels.hpp"

namespace cbm::kernels {
namespace {

struct Table {
    Backend backend;
    double (*decayed_sum)(std::span<const double>, double, double) noexcept;
    double (*add_and_max)(std::span<double>, std::span<const double>) noexcept;
    std::size_t (*count_at_or_above)(std::span<const double>, double) noexcept;
};

constexpr Table scalar_table{Backend::scalar, &scalar::decayed_sum, &scalar::add_and_max,
                             &scalar::count_at_or_above};
#if defined(CBM_BUILD_AVX2)
constexpr Table avx2_table{Backend::avx2, &avx2::decayed_sum, &avx2::add_and_max, &avx2::count_at_or_above};
#endif

bool cpu_has_avx2() noexcept {
#if defined(CBM_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Table* detect() noexcept {
#if defined(CBM_BUILD_AVX2)
    if (cpu_has_avx2()) return &avx2_table;
#endif
    return &scalar_table;
}

std::atomic<const Table*>& current() noexcept {
    static std::atomic<const Table*> table{detect()};
    return table;
}

}  // namespace

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed)->backend; }

bool backend_available(Backend backend) noexcept {
    if (backend == Backend::scalar) return true;
    return cpu_has_avx2();
}

void force_backend(Backend backend) {
    if (!backend_available(backend))
        detail::fail_validation("kernels::force_backend", std::string(backend_name(backend)) + " not available");
#if defined(CBM_BUILD_AVX2)
    current().store(backend == Backend::avx2 ? &avx2_table : &scalar_table);
#else
    current().store(&scalar_table);
#endif
}

void reset_backend() noexcept { current().store(detect()); }

std::string_view backend_name(Backend backend) noexcept {
    switch (backend) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

double decayed_sum(std::span<const double> times, double s, double rate) noexcept {
    return current().load(std::memory_order_relaxed)->decayed_sum(times, s, rate);
}

double add_and_max(std::span<double> levels, std::span<const double> increments) noexcept {
    return current().load(std::memory_order_relaxed)->add_and_max(levels, increments);
}

std::size_t count_at_or_above(std::span<const double> values, double threshold) noexcept {
    return current().load(std::memory_order_relaxed)->count_at_or_above(values, threshold);
}

}  // namespace cbm::kernels
