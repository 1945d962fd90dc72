#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace bicshg {

// Applies fn to every input on a small worker pool. Results keep the input
// order regardless of completion order. The first exception (by input index)
// is rethrown after all workers finish.
template <class In, class Fn>
auto parallel_map(const std::vector<In>& inputs, Fn fn, unsigned workers = 0)
    -> std::vector<decltype(fn(inputs.front()))> {
    using Out = decltype(fn(inputs.front()));
    const std::size_t n = inputs.size();
    std::vector<std::optional<Out>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(inputs[i]));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<Out> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace bicshg
