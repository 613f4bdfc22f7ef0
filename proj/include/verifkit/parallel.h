// Copyright (c) 2026 The verifkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VERIFKIT_PARALLEL_H_
#define VERIFKIT_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace verifkit {

// Runs body(i) for i in [0, n) on up to `jobs` threads using a static
// contiguous partition. Callers write results into per-index slots, so the
// outcome does not depend on `jobs`. The first exception thrown by any worker
// is rethrown after all threads join.
void ParallelFor(std::size_t n, int jobs,
                 const std::function<void(std::size_t)>& body);

}  // namespace verifkit

#endif  // VERIFKIT_PARALLEL_H_
