#pragma once

#include <functional>
#include <ostream>

#include "dars/approx/network.hpp"

namespace dars {

// Evaluates fn at the cell centers of a rows×cols grid over [0,1]²: row i maps
// to y = (i+0.5)/rows, column j to x = (j+0.5)/cols. Row-major result.
Mat grid_heatmap(const std::function<double(double, double)>& fn, int rows = 50, int cols = 50);

// One CSV row per grid row, '%.17g' cells, no header.
void heatmap_csv(std::ostream& os, const Mat& grid);

}  // namespace dars
