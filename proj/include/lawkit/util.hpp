#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace lawkit {

// Log-spaced grid from lo to hi inclusive; count == 1 returns {lo}.
std::vector<double> geomspace(double lo, double hi, int count);

std::vector<double> linspace(double lo, double hi, int count);

// splitmix64 step, used to derive independent per-replicate seeds so that
// results do not depend on worker count or iteration order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Runs fn(i) for i in [0, n). Work is split into contiguous blocks over at
// most `threads` workers (0 = hardware concurrency). fn must only touch
// per-index state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

}  // namespace lawkit
