// SPDX-License-Identifier: Apache-2.0
//
// csitopt - training and feedback budgeting for the multiuser MIMO downlink
// Copyright (C) 2026 The csitopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CSITOPT_PARALLEL_HPP
#define CSITOPT_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace csitopt
{

// Worker count: CSITOPT_THREADS if set and positive, otherwise hardware concurrency.
inline int thread_count()
{
    if (const char* env = std::getenv("CSITOPT_THREADS"))
    {
        try
        {
            const int n = std::stoi(env);
            if (n > 0)
                return n;
        }
        catch (const std::exception&)
        {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Calls fn(i) for i in [0, n) on `threads` workers with static contiguous chunks.
// fn must only write to state owned by index i; the first exception is rethrown.
template <typename F>
void parallel_for(std::size_t n, F&& fn, int threads = thread_count())
{
    const std::size_t workers = std::min<std::size_t>(std::max(1, threads), n);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
        {
            const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
            pool.emplace_back([&, begin, end] {
                try
                {
                    for (std::size_t i = begin; i < end; ++i)
                        fn(i);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            });
        }
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace csitopt

#endif
