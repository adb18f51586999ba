#include "dars/analysis/heatmap.hpp"

#include <cstdio>

#include "dars/common/errors.hpp"

namespace dars {

Mat grid_heatmap(const std::function<double(double, double)>& fn, int rows, int cols) {
  if (rows < 1 || cols < 1) throw ShapeError("grid_heatmap: grid dims must be positive");
  Mat grid(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const double y = (i + 0.5) / rows;
    for (int j = 0; j < cols; ++j) grid(i, j) = fn((j + 0.5) / cols, y);
  }
  return grid;
}

void heatmap_csv(std::ostream& os, const Mat& grid) {
  char buf[64];
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", grid(i, j));
      os << buf << (j + 1 == grid.cols ? "" : ",");
    }
    os << "\n";
  }
}

}  // namespace dars
