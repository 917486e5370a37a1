#ifndef LOGDIFF_DETAIL_PARALLEL_MAP_HPP
#define LOGDIFF_DETAIL_PARALLEL_MAP_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

namespace logdiff {

template <class R>
std::vector<R> parallel_map(std::size_t count, std::size_t workers, const std::function<R(std::size_t)>& job)
{
    std::vector<std::optional<R>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};

    auto drain = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(job(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (n_threads == 1) {
        drain();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(drain);
    }

    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(count);
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

} // namespace logdiff

#endif // LOGDIFF_DETAIL_PARALLEL_MAP_HPP
