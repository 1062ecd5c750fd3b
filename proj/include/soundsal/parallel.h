// Copyright 2026 The soundsal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOUNDSAL_PARALLEL_H_
#define SOUNDSAL_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace soundsal {

int DefaultThreadCount();

// Runs body(i) for i in [0, count) on up to `threads` worker threads.
// Iterations are handed out in index order; callers write results into
// per-index slots so output never depends on scheduling. If any iteration
// throws, the exception from the lowest failing index is rethrown after all
// workers stop.
void ParallelFor(std::size_t count, int threads,
                 const std::function<void(std::size_t)>& body);

}  // namespace soundsal

#endif  // SOUNDSAL_PARALLEL_H_
