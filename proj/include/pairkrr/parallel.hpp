#pragma once

#include <cstddef>

namespace pairkrr::parallel {

enum class Backend { Serial, OpenMP };

/// Active compute backend. Defaults to OpenMP when compiled with it,
/// overridable via PAIRKRR_BACKEND=serial|openmp.
Backend backend();
void set_backend(Backend b);
bool openmp_compiled();
int max_threads();

/// Runs body(i) for i in [0, n). Iterations must be independent; every kernel
/// built on this keeps a fixed per-element summation order, so serial and
/// OpenMP execution produce bit-identical results.
template <typename Body>
void parallel_for(std::size_t n, const Body& body);

namespace detail {
void for_openmp(std::size_t n, void* ctx, void (*run)(void*, std::size_t));
}

template <typename Body>
void parallel_for(std::size_t n, const Body& body) {
    if (backend() == Backend::OpenMP && n > 1) {
        auto thunk = [](void* ctx, std::size_t i) { (*static_cast<const Body*>(ctx))(i); };
        detail::for_openmp(n, const_cast<Body*>(&body), thunk);
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
}

} // namespace pairkrr::parallel
