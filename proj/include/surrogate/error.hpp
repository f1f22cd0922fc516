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


#pragma once

#include <stdexcept>
#include <string>

namespace surrogate {

/// Malformed, inconsistent, or corrupted input data. Maps to CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite loss during training. Maps to CLI exit code 4.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, double learning_rate);
  DivergenceError(const std::string& message, int epoch, double learning_rate);

  int epoch() const { return epoch_; }
  double learning_rate() const { return learning_rate_; }

 private:
  int epoch_;
  double learning_rate_;
};

}  // namespace surrogate
