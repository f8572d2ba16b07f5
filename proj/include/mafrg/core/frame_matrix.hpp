#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mafrg {

/// Row-major matrix of 32-bit samples. Rows are frames, columns are channels.
///
/// Samples are stored as float so that the binary sequence format round-trips
/// bit-exactly; every metric promotes to double before arithmetic.
class FrameMatrix {
 public:
  FrameMatrix() = default;
  FrameMatrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  FrameMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  float operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  float& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

  std::span<const float> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<float> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  /// Copy of one channel as doubles.
  std::vector<double> column(std::size_t c) const;

  /// Copy of rows [begin, end).
  FrameMatrix slice_rows(std::size_t begin, std::size_t end) const;

  friend bool operator==(const FrameMatrix&, const FrameMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

}  // namespace mafrg
