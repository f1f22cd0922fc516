// Copyright 2026 The svd-surrogate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "surrogate/error.hpp"

#include <fmt/format.h>

namespace surrogate {

DivergenceError::DivergenceError(int epoch, double learning_rate)
    : std::runtime_error(fmt::format("training diverged (non-finite loss) at epoch {} with lr={}", epoch,
                                     learning_rate)),
      epoch_(epoch),
      learning_rate_(learning_rate) {}

DivergenceError::DivergenceError(const std::string& message, int epoch, double learning_rate)
    : std::runtime_error(message), epoch_(epoch), learning_rate_(learning_rate) {}

}  // namespace surrogate
