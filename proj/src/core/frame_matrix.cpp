#include "mafrg/core/frame_matrix.hpp"

#include <utility>

#include "mafrg/core/error.hpp"

namespace mafrg {

FrameMatrix::FrameMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw ArgumentError("FrameMatrix: payload of " + std::to_string(data_.size()) +
                        " values does not match " + std::to_string(rows_) + "x" +
                        std::to_string(cols_));
}

std::vector<double> FrameMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
  return out;
}

FrameMatrix FrameMatrix::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows_) throw ArgumentError("FrameMatrix::slice_rows: bad range");
  std::vector<float> out(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                         data_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
  return FrameMatrix(end - begin, cols_, std::move(out));
}

}  // namespace mafrg
