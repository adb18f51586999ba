#pragma once

#include <cblas.h>

#include <cstddef>
#include <vector>

#include "dars/common/errors.hpp"

namespace dars {

using Vec = std::vector<double>;

// Dense row-major matrix. Layer weights are stored [out x in] so a forward
// pass over a batch X [n x in] is X * W^T.
struct Mat {
  int rows = 0;
  int cols = 0;
  Vec data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
};

// C = A * B^T.  A is [n x k], B is [m x k], C is [n x m].
inline void gemm_nt(const Mat& a, const Mat& b, Mat& c) {
  if (a.cols != b.cols) throw ShapeError("gemm_nt: inner dims disagree");
  c.rows = a.rows;
  c.cols = b.rows;
  c.data.assign(static_cast<size_t>(c.rows) * c.cols, 0.0);
  if (a.rows == 0 || b.rows == 0 || a.cols == 0) return;
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, a.rows, b.rows, a.cols,
              1.0, a.data.data(), a.cols, b.data.data(), b.cols, 0.0,
              c.data.data(), c.cols);
}

// C = A^T * B.  A is [n x k], B is [n x m], C is [k x m].
inline void gemm_tn(const Mat& a, const Mat& b, Mat& c) {
  if (a.rows != b.rows) throw ShapeError("gemm_tn: inner dims disagree");
  c.rows = a.cols;
  c.cols = b.cols;
  c.data.assign(static_cast<size_t>(c.rows) * c.cols, 0.0);
  if (a.cols == 0 || b.cols == 0 || a.rows == 0) return;
  cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, a.cols, b.cols, a.rows,
              1.0, a.data.data(), a.cols, b.data.data(), b.cols, 0.0,
              c.data.data(), c.cols);
}

// C = A * B.  A is [n x k], B is [k x m], C is [n x m].
inline void gemm_nn(const Mat& a, const Mat& b, Mat& c) {
  if (a.cols != b.rows) throw ShapeError("gemm_nn: inner dims disagree");
  c.rows = a.rows;
  c.cols = b.cols;
  c.data.assign(static_cast<size_t>(c.rows) * c.cols, 0.0);
  if (a.rows == 0 || b.cols == 0 || a.cols == 0) return;
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, a.rows, b.cols, a.cols,
              1.0, a.data.data(), a.cols, b.data.data(), b.cols, 0.0,
              c.data.data(), c.cols);
}

}  // namespace dars
