#include "pairkrr/parallel.hpp"

#include "pairkrr/common.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pairkrr::parallel {

namespace {

Backend initial_backend() {
#ifdef _OPENMP
    Backend def = Backend::OpenMP;
#else
    Backend def = Backend::Serial;
#endif
    if (const char* env = std::getenv("PAIRKRR_BACKEND")) {
        if (std::strcmp(env, "serial") == 0) return Backend::Serial;
        if (std::strcmp(env, "openmp") == 0) {
#ifndef _OPENMP
            throw data_error("PAIRKRR_BACKEND=openmp but this build has no OpenMP support");
#endif
            return Backend::OpenMP;
        }
        throw data_error("PAIRKRR_BACKEND must be 'serial' or 'openmp', got: " + std::string(env));
    }
    return def;
}

Backend& state() {
    static Backend b = initial_backend();
    return b;
}

} // namespace

Backend backend() { return state(); }

void set_backend(Backend b) {
#ifndef _OPENMP
    if (b == Backend::OpenMP) throw data_error("this build has no OpenMP support");
#endif
    state() = b;
}

bool openmp_compiled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace detail {

void for_openmp(std::size_t n, void* ctx, void (*run)(void*, std::size_t)) {
#ifdef _OPENMP
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) run(ctx, static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < n; ++i) run(ctx, i);
#endif
}

} // namespace detail

} // namespace pairkrr::parallel
