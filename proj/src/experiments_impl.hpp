#pragma once

#include "asymerr/experiments.hpp"
#include "asymerr/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace asymerr::detail {

double param(const ExperimentSpec& spec, const std::string& key);
ExperimentOutcome start(const ExperimentSpec& spec, const char* name);

// Replicas are cut into fixed chunks; chunk k draws from RandomSource(seed + k)
// whichever thread runs it, and the partial sums are merged in chunk order, so
// the result does not depend on the thread count.
inline constexpr long kChunk = 10000;

template <class Acc, class Body>
Acc run_chunked(const ExperimentSpec& spec, Body body) {
    const long nchunks = (spec.replicas + kChunk - 1) / kChunk;
    std::vector<Acc> parts(static_cast<std::size_t>(nchunks));
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (long k; (k = next++) < nchunks;) {
            try {
                RandomSource rs(spec.seed + static_cast<std::uint64_t>(k));
                parts[k] = body(rs, std::min(kChunk, spec.replicas - k * kChunk));
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!err) err = std::current_exception();
                next = nchunks;
            }
        }
    };
    unsigned nt = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    nt = static_cast<unsigned>(std::min<long>(nt, nchunks));
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < nt; ++i) pool.emplace_back(work);
        work();
    }
    if (err) std::rethrow_exception(err);
    Acc total{};
    for (const auto& p : parts) total += p;
    return total;
}

} // namespace asymerr::detail
