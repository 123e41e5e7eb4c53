#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tmmsb {

// Dense row-major matrix over a flat buffer.
template <class T>
struct BasicMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  BasicMatrix() = default;
  BasicMatrix(int r, int c, T fill = T{})
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  static BasicMatrix from_rows(std::initializer_list<std::initializer_list<T>> init) {
    BasicMatrix m;
    m.rows = static_cast<int>(init.size());
    m.cols = m.rows > 0 ? static_cast<int>(init.begin()->size()) : 0;
    m.data.reserve(static_cast<std::size_t>(m.rows) * m.cols);
    for (const auto& r : init) m.data.insert(m.data.end(), r.begin(), r.end());
    return m;
  }

  T& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  const T& operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }

  std::span<T> row(int i) { return {data.data() + static_cast<std::size_t>(i) * cols,
                                    static_cast<std::size_t>(cols)}; }
  std::span<const T> row(int i) const {
    return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
  }

  bool same_shape(const BasicMatrix& o) const { return rows == o.rows && cols == o.cols; }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;
};

using Matrix = BasicMatrix<double>;
using IntMatrix = BasicMatrix<int>;

// Rank-3 tensor, last index contiguous.
struct Tensor3 {
  int n0 = 0;
  int n1 = 0;
  int n2 = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int a, int b, int c, double fill = 0.0)
      : n0(a), n1(b), n2(c),
        data(static_cast<std::size_t>(a) * b * c, fill) {}

  double& operator()(int i, int j, int k) {
    return data[(static_cast<std::size_t>(i) * n1 + j) * n2 + k];
  }
  double operator()(int i, int j, int k) const {
    return data[(static_cast<std::size_t>(i) * n1 + j) * n2 + k];
  }

  std::span<double> slice(int i, int j) {
    return {data.data() + (static_cast<std::size_t>(i) * n1 + j) * n2,
            static_cast<std::size_t>(n2)};
  }
  std::span<const double> slice(int i, int j) const {
    return {data.data() + (static_cast<std::size_t>(i) * n1 + j) * n2,
            static_cast<std::size_t>(n2)};
  }
};

// Reorders columns: out(:,k) = in(:,perm[k]).
inline Matrix permute_columns(const Matrix& in, std::span<const int> perm) {
  Matrix out(in.rows, in.cols);
  for (int i = 0; i < in.rows; ++i)
    for (int k = 0; k < in.cols; ++k) out(i, k) = in(i, perm[k]);
  return out;
}

// Applies one permutation to both axes of a square matrix.
inline Matrix permute_square(const Matrix& in, std::span<const int> perm) {
  Matrix out(in.rows, in.cols);
  for (int k = 0; k < in.rows; ++k)
    for (int l = 0; l < in.cols; ++l) out(k, l) = in(perm[k], perm[l]);
  return out;
}

}  // namespace tmmsb
