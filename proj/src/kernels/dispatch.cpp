// Runtime ISA selection. No intrinsics in this file.

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "sparsebar/kernels.hpp"

namespace sparsebar::kernels {
namespace {

Isa initial_isa() noexcept {
    if (const char* env = std::getenv("SPARSEBAR_SIMD"); env && std::string_view(env) == "scalar")
        return Isa::scalar;
    return (avx2_table() && cpu_has_avx2()) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool set_isa(Isa isa) noexcept {
    if (isa == Isa::avx2 && !(avx2_table() && cpu_has_avx2())) return false;
    current().store(isa, std::memory_order_relaxed);
    return true;
}

std::string_view isa_name(Isa isa) noexcept {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

const KernelTable& active() noexcept {
    if (active_isa() == Isa::avx2) return *avx2_table();
    return scalar_table();
}

}  // namespace sparsebar::kernels
