#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace qpack {

/// Run `count` tasks on up to `jobs` workers. Tasks must derive all state
/// (seeds included) from their index and write to preallocated slots, so the
/// result is identical for any worker count.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
    jobs = jobs < 1 ? 1 : jobs;
    if (jobs == 1 || count <= 1) {
        for (int i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    const int workers = jobs < count ? jobs : count;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace qpack
