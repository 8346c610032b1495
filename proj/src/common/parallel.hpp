/*
 * Copyright 2026 The FedTrust Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDTRUST_COMMON_PARALLEL_HPP_
#define FEDTRUST_COMMON_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace fedtrust {

// Worker count from FEDTRUST_THREADS (0 or unset = hardware concurrency).
size_t DefaultThreadCount();

// Runs fn(0..n-1) on up to `threads` workers. If any call throws, the
// exception from the lowest failing index is rethrown after all workers
// finish, so error reporting does not depend on scheduling.
void ParallelFor(size_t n, size_t threads,
                 const std::function<void(size_t)>& fn);

}  // namespace fedtrust

#endif  // FEDTRUST_COMMON_PARALLEL_HPP_
