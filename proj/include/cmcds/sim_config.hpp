#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "cmcds/errors.hpp"

namespace cmcds {

enum class Scheme { LogEuler, LogPredictorCorrector };
enum class BreachMode { Reject, Absorb };

struct SimConfig {
    std::size_t measure = 1;       // index i* of the numeraire Chat_{i*-1,i*}
    std::size_t paths = 10000;
    std::size_t stepsPerPeriod = 4;
    std::uint64_t seed = 42;
    std::uint32_t stream = 0;      // RNG stream id (premium-leg runs use j)
    Scheme scheme = Scheme::LogEuler;
    std::size_t threads = 0;       // 0: hardware concurrency

    // dual-model admissibility handling
    BreachMode breachMode = BreachMode::Reject;
    std::size_t maxRetries = 100;
    double breachCeiling = 0.10;   // abort above this fraction of flagged paths

    void validate() const {
        if (paths < 1) throw ValidationError("need at least one path");
        if (stepsPerPeriod < 1) throw ValidationError("need at least one step per period");
    }

    std::size_t workerCount() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? hw : 1;
    }
};

/// Mean / standard-error accumulator with a batch-ordered reduction.
struct SampleStats {
    double sum = 0.0;
    double sumSq = 0.0;
    std::size_t n = 0;

    void add(double x) {
        sum += x;
        sumSq += x * x;
        ++n;
    }
    void merge(const SampleStats& o) {
        sum += o.sum;
        sumSq += o.sumSq;
        n += o.n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double v = (sumSq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return v > 0.0 ? v : 0.0;
    }
    double stderror() const { return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

namespace detail {

constexpr std::size_t kBatchSize = 4096; // fixed so thread count cannot affect results

/// Run `work(batchIndex, pathBegin, pathEnd)` over all path batches on a small
/// thread pool; batches are handed out in order and results must be merged by
/// batch index by the caller.
inline void forEachBatch(std::size_t paths, std::size_t workers,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& work) {
    const std::size_t batches = (paths + kBatchSize - 1) / kBatchSize;
    if (workers <= 1 || batches <= 1) {
        for (std::size_t b = 0; b < batches; ++b)
            work(b, b * kBatchSize, std::min(paths, (b + 1) * kBatchSize));
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> nextBatch{0};
    const std::size_t useWorkers = std::min(workers, batches);
    for (std::size_t w = 0; w < useWorkers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t b = nextBatch.fetch_add(1);
                if (b >= batches) return;
                work(b, b * kBatchSize, std::min(paths, (b + 1) * kBatchSize));
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace detail
} // namespace cmcds
