#include "gafvit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace gafvit::kernels {

#if defined(GAFVIT_HAVE_AVX2)
const KernelTable* avx2_table();
#endif

const KernelTable* avx2() {
#if defined(GAFVIT_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

std::vector<const KernelTable*> available() {
    std::vector<const KernelTable*> out{&scalar()};
    if (auto* t = avx2()) out.push_back(t);
    return out;
}

namespace {

const KernelTable* find(std::string_view name) {
    for (auto* t : available())
        if (name == t->name) return t;
    return nullptr;
}

const KernelTable* initial() {
    if (const char* env = std::getenv("GAFVIT_KERNELS")) {
        if (auto* t = find(env)) return t;
    }
    if (auto* t = avx2()) return t;
    return &scalar();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial()};
    return table;
}

} // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
    auto* t = find(name);
    if (!t) return false;
    current().store(t, std::memory_order_release);
    return true;
}

} // namespace gafvit::kernels
