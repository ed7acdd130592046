#include <atomic>
#include <cstdlib>
#include <string_view>

#include "latsteer/kernels.hpp"

namespace latsteer::kernels {

#if defined(LATSTEER_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(LATSTEER_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const KernelTable* initial_choice() {
    const char* env = std::getenv("LATSTEER_ISA");
    if (env && std::string_view(env) == "scalar") return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_choice()};
    return table;
}

}  // namespace

const KernelTable& active_kernels() { return *current().load(std::memory_order_relaxed); }

bool select_kernels(std::string_view name) {
    if (name == "scalar") {
        current().store(&scalar_kernels());
        return true;
    }
    if (name == "avx2") {
        if (const KernelTable* t = avx2_kernels()) {
            current().store(t);
            return true;
        }
    }
    return false;
}

}  // namespace latsteer::kernels
