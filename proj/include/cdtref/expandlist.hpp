#ifndef CDTREF_EXPANDLIST_HPP
#define CDTREF_EXPANDLIST_HPP

// Generic tuple-list expansion engine: process an operation window, append
// emitted tuples behind it, advance, repeat until no window remains. Workload
// below the compaction threshold skips compaction entirely (Rule 1 hook).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace cdtref {

struct CapacityExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CompactionPolicy {
    std::size_t threshold = 1024;          // windows smaller than this are not compacted
    std::size_t capacity = std::size_t{1} << 26;
};

// Low workload: the bookkeeping of compaction costs more than the dead tuples.
inline bool should_compact(std::size_t window_size, const CompactionPolicy& policy) {
    return window_size >= policy.threshold;
}

template <class T>
struct TupleList {
    std::vector<T> items;
    std::vector<char> valid;               // parallel to items
    std::size_t left = 0;
    std::size_t right = 0;                 // inclusive; meaningful only when !items.empty()

    void push(const T& t) {
        items.push_back(t);
        valid.push_back(1);
        right = items.size() - 1;
    }
    std::size_t size() const { return items.size(); }
};

// Per-tuple emissions: to the list being expanded and, optionally, to a
// secondary list the caller passes to expand().
template <class T>
struct Emission {
    std::vector<T> self;
    std::vector<T> aux;
};

template <class T>
struct ExpandHooks {
    std::size_t fanout_bound = 4;          // max |self| + |aux| per call
    std::function<bool(const T&)> predicate;
    // Ops may invalidate tuples in place (list.valid) using claim-style
    // conditional updates; under parallel execution those marks must be
    // order-independent.
    std::function<void(TupleList<T>&, std::size_t, Emission<T>&)> op_true;
    std::function<void(TupleList<T>&, std::size_t, Emission<T>&)> op_false;
};

namespace detail {

template <class T>
inline void compact_window(TupleList<T>& list, std::size_t begin, std::size_t end) {
    std::size_t out = begin;
    for (std::size_t i = begin; i < end; ++i) {
        if (!list.valid[i]) continue;
        if (out != i) {
            list.items[out] = std::move(list.items[i]);
            list.valid[out] = 1;
        }
        ++out;
    }
    list.items.erase(list.items.begin() + out, list.items.begin() + end);
    list.valid.erase(list.valid.begin() + out, list.valid.begin() + end);
}

} // namespace detail

// Expand to fixpoint. Emissions are appended in (source index, emission slot)
// lexicographic order, so sequential runs are bit-deterministic regardless of
// the order hooks were applied in (shuffle_seed exercises that property).
// aux, when given, receives secondary emissions and is not itself expanded.
template <class T>
TupleList<T> expand(TupleList<T> list, const ExpandHooks<T>& hooks,
                    const CompactionPolicy& policy, unsigned executors = 1,
                    std::type_identity_t<TupleList<T>*> aux = nullptr,
                    std::optional<std::uint64_t> shuffle_seed = {}) {
    std::size_t left = 0;
    while (left < list.items.size()) {
        std::size_t end = list.items.size();
        if (should_compact(end - left, policy)) {
            detail::compact_window(list, left, end);
            end = list.items.size();
            if (left >= end) break;
        }
        list.left = left;
        list.right = end - 1;

        std::vector<Emission<T>> emissions(end - left);
        auto process = [&](std::size_t i) {
            if (!list.valid[i]) return;
            Emission<T>& em = emissions[i - left];
            if (hooks.predicate(list.items[i]))
                hooks.op_true(list, i, em);
            else
                hooks.op_false(list, i, em);
            if (em.self.size() + em.aux.size() > hooks.fanout_bound)
                throw CapacityExceeded("hook exceeded declared fan-out bound");
        };

        if (executors <= 1) {
            std::vector<std::size_t> order(end - left);
            std::iota(order.begin(), order.end(), left);
            if (shuffle_seed) {
                std::mt19937_64 rng(*shuffle_seed);
                std::shuffle(order.begin(), order.end(), rng);
            }
            for (std::size_t i : order) process(i);
        } else {
            std::vector<std::thread> pool;
            const std::size_t n = end - left;
            const std::size_t chunk = (n + executors - 1) / executors;
            for (unsigned x = 0; x < executors; ++x) {
                const std::size_t lo = left + x * chunk;
                const std::size_t hi = std::min(end, lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back([&, lo, hi] {
                    for (std::size_t i = lo; i < hi; ++i) process(i);
                });
            }
            for (auto& th : pool) th.join();   // round barrier
        }

        for (const Emission<T>& em : emissions) {
            for (const T& t : em.self) {
                if (list.items.size() >= policy.capacity)
                    throw CapacityExceeded("tuple list capacity exceeded");
                list.push(t);
            }
            if (aux)
                for (const T& t : em.aux) aux->push(t);
        }
        left = end;
    }
    list.left = left;
    list.right = list.items.empty() ? 0 : list.items.size() - 1;
    return list;
}

} // namespace cdtref

#endif
