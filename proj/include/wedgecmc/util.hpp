#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace wedgecmc {

// Thread budget: min(hardware, WEDGECMC_THREADS). Always >= 1.
int threadBudget();

// Chunked parallel loop over [0, n). Deterministic: the work split does not
// depend on the thread budget, only the execution interleaving does, so any
// per-index output is reproducible.
void parallelFor(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunkFn);

std::uint64_t fnv1a64(const std::string& bytes);
std::string toHex(std::uint64_t value);

}  // namespace wedgecmc
