// Copyright 2026 The snow-lpwan Authors
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

#ifndef SNOW_FFT_HPP_
#define SNOW_FFT_HPP_

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "snow/error.hpp"

namespace snow {

using cd = std::complex<double>;

// Unnormalized FFTW plan of fixed size and direction. Forward computes
// X[k] = sum x[n] e^{-j2pi kn/N}; inverse the same with +j and no 1/N.
// Not thread-safe; give each thread its own instance.
class Fft {
 public:
  enum class Direction { kForward, kInverse };

  Fft(std::size_t size, Direction direction) : size_(size) {
    if (size == 0) throw Error("FFT size must be positive");
    in_ = fftw_alloc_complex(size);
    out_ = fftw_alloc_complex(size);
    plan_ = fftw_plan_dft_1d(static_cast<int>(size), in_, out_,
                             direction == Direction::kForward ? FFTW_FORWARD
                                                              : FFTW_BACKWARD,
                             FFTW_ESTIMATE);
    if (plan_ == nullptr) throw Error("FFTW planning failed");
  }

  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  Fft(Fft&& other) noexcept
      : size_(other.size_),
        in_(std::exchange(other.in_, nullptr)),
        out_(std::exchange(other.out_, nullptr)),
        plan_(std::exchange(other.plan_, nullptr)),
        executions_(other.executions_) {}

  Fft& operator=(Fft&& other) noexcept {
    if (this != &other) {
      release();
      size_ = other.size_;
      in_ = std::exchange(other.in_, nullptr);
      out_ = std::exchange(other.out_, nullptr);
      plan_ = std::exchange(other.plan_, nullptr);
      executions_ = other.executions_;
    }
    return *this;
  }

  ~Fft() { release(); }

  std::size_t size() const { return size_; }

  // Transforms executed so far by this instance.
  std::uint64_t executions() const { return executions_; }

  void execute(std::span<const cd> in, std::span<cd> out) {
    if (in.size() != size_ || out.size() != size_) {
      throw Error("FFT buffer size mismatch");
    }
    std::copy(in.begin(), in.end(), reinterpret_cast<cd*>(in_));
    fftw_execute(plan_);
    ++executions_;
    const cd* result = reinterpret_cast<const cd*>(out_);
    std::copy(result, result + size_, out.begin());
  }

 private:
  void release() {
    if (plan_ != nullptr) fftw_destroy_plan(plan_);
    if (in_ != nullptr) fftw_free(in_);
    if (out_ != nullptr) fftw_free(out_);
    plan_ = nullptr;
    in_ = out_ = nullptr;
  }

  std::size_t size_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
  std::uint64_t executions_ = 0;
};

}  // namespace snow

#endif  // SNOW_FFT_HPP_
