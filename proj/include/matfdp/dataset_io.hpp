#ifndef MATFDP_DATASET_IO_HPP
#define MATFDP_DATASET_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "matfdp/errors.hpp"
#include "matfdp/matcore.hpp"
#include "matfdp/teststats.hpp"

namespace matfdp {

// A dataset problem attributable to one file.
class DatasetFileError : public InvalidDataset {
 public:
  DatasetFileError(std::filesystem::path path, const std::string& what)
      : InvalidDataset(path.string() + ": " + what), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// manifest.json: {"p": .., "q": .., "n": .., "m": .., "treatment": [files],
// "control": [files]}; file names are relative to the dataset directory.
struct Manifest {
  Index p = 0;
  Index q = 0;
  std::vector<std::string> treatment;
  std::vector<std::string> control;
};

Manifest read_manifest(const std::filesystem::path& dir);

// Parses every listed CSV (in parallel). On failure throws DatasetFileError
// naming the first offending file in manifest order.
TwoSampleDataset load_dataset(const std::filesystem::path& dir);

// Writes manifest.json plus treatment_NNN.csv / control_NNN.csv.
void write_dataset(const std::filesystem::path& dir, const TwoSampleDataset& ds);

Matrix read_matrix_csv(const std::filesystem::path& path, Index rows, Index cols);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

// Shortest-safe round-trip formatting: 17 significant digits.
std::string format_double(double v);

}  // namespace matfdp

#endif  // MATFDP_DATASET_IO_HPP
