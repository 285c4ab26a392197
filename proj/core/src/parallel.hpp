// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace phc::detail
{

inline int resolve_threads(int requested)
{
  if (requested > 0)
  {
    return requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, count). Work is claimed dynamically, results must be
// written to per-index slots by fn. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn &&fn)
{
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                                             count);
  if (workers <= 1)
  {
    for (std::size_t i = 0; i < count; i++)
    {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; w++)
    {
      pool.emplace_back(
          [&, w]
          {
            try
            {
              for (std::size_t i = next++; i < count; i = next++)
              {
                fn(i);
              }
            }
            catch (...)
            {
              errors[w] = std::current_exception();
              next = count;
            }
          });
    }
  }
  for (auto &e : errors)
  {
    if (e)
    {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace phc::detail
