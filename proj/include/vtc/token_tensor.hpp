#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vtc/errors.hpp"

namespace vtc {

/// Dense frames x slots x width tensor, row-major (width fastest).
template <typename T>
class TokenTensor {
 public:
  TokenTensor() = default;
  TokenTensor(std::size_t frames, std::size_t slots, std::size_t width, T fill = T{})
      : frames_(frames), slots_(slots), width_(width), data_(frames * slots * width, fill) {}
  TokenTensor(std::size_t frames, std::size_t slots, std::size_t width, std::vector<T> data)
      : frames_(frames), slots_(slots), width_(width), data_(std::move(data)) {
    require(data_.size() == frames_ * slots_ * width_, "TokenTensor: data size does not match shape");
  }

  std::size_t frames() const { return frames_; }
  std::size_t slots() const { return slots_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  T& at(std::size_t f, std::size_t s, std::size_t w) { return data_[(f * slots_ + s) * width_ + w]; }
  const T& at(std::size_t f, std::size_t s, std::size_t w) const {
    return data_[(f * slots_ + s) * width_ + w];
  }
  std::span<T> token(std::size_t f, std::size_t s) {
    return {data_.data() + (f * slots_ + s) * width_, width_};
  }
  std::span<const T> token(std::size_t f, std::size_t s) const {
    return {data_.data() + (f * slots_ + s) * width_, width_};
  }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }
  std::vector<T>& storage() { return data_; }

  bool operator==(const TokenTensor&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t slots_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

}  // namespace vtc
