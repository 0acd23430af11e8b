#include "wavesep/dsp/text_grid.hpp"

#include <fstream>
#include <iomanip>
#include <limits>

#include "wavesep/error.hpp"

namespace wavesep::dsp {

void write_text_grid(const Grid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << grid.rows << ' ' << grid.cols << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      if (c > 0) out << ' ';
      out << grid.at(r, c);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Grid read_text_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Grid grid;
  if (!(in >> grid.rows >> grid.cols)) throw IoError(path.string() + ": bad grid header");
  grid.values.resize(grid.rows * grid.cols);
  for (double& v : grid.values) {
    if (!(in >> v)) throw IoError(path.string() + ": grid truncated");
  }
  return grid;
}

}  // namespace wavesep::dsp
