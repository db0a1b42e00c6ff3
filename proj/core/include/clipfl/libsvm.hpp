#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <iosfwd>

namespace clipfl {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Binary-labelled sparse dataset in libsvm layout.
struct LibsvmDataset {
  SparseRows features;    ///< samples x dim
  Eigen::VectorXd labels;  ///< entries in {-1, +1}

  std::size_t samples() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

/// Parses `label idx:val idx:val ...` lines with 1-based, non-repeating
/// indices. Blank lines are skipped. The dimension is the largest index seen.
///
/// Labels are mapped to {-1, +1}: with two distinct raw labels the larger
/// becomes +1; with a single raw label its sign decides. More than two
/// distinct labels is a parse error.
///
/// Throws ParseError (with the 1-based line number) on malformed input and
/// InputError when the input holds no samples.
LibsvmDataset read_libsvm(std::istream& in);

/// read_libsvm on a file. Throws IoError when the file cannot be opened.
LibsvmDataset load_libsvm(const std::filesystem::path& path);

}  // namespace clipfl
