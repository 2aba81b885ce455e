#include "matfdp/dataset_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "matfdp/parallel.hpp"

namespace matfdp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Manifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw DatasetFileError(path, "cannot open manifest");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DatasetFileError(path, std::string("invalid JSON: ") + e.what());
  }
  Manifest m;
  try {
    m.p = j.at("p").get<Index>();
    m.q = j.at("q").get<Index>();
    m.treatment = j.at("treatment").get<std::vector<std::string>>();
    m.control = j.at("control").get<std::vector<std::string>>();
    const auto n = j.at("n").get<std::size_t>();
    const auto mm = j.at("m").get<std::size_t>();
    if (n != m.treatment.size() || mm != m.control.size()) {
      throw DatasetFileError(path, "n / m do not match the file lists");
    }
  } catch (const json::exception& e) {
    throw DatasetFileError(path, std::string("bad manifest field: ") + e.what());
  }
  if (m.p < 1 || m.q < 1) throw DatasetFileError(path, "p and q must be positive");
  return m;
}

Matrix read_matrix_csv(const fs::path& path, Index rows, Index cols) {
  std::ifstream in(path);
  if (!in) throw DatasetFileError(path, "cannot open file");
  Matrix out(rows, cols);
  std::string line;
  Index r = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (r >= rows) throw DatasetFileError(path, "more than " + std::to_string(rows) + " rows");
    const char* s = line.c_str();
    Index c = 0;
    while (true) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(s, &end);
      if (end == s || errno == ERANGE || !std::isfinite(v)) {
        throw DatasetFileError(path, "row " + std::to_string(r + 1) + ": bad number");
      }
      while (*end == ' ' || *end == '\t') ++end;
      if (c >= cols) throw DatasetFileError(path, "row " + std::to_string(r + 1) + ": too many columns");
      out(r, c++) = v;
      if (*end == '\0') break;
      if (*end != ',') throw DatasetFileError(path, "row " + std::to_string(r + 1) + ": expected ','");
      s = end + 1;
    }
    if (c != cols) {
      throw DatasetFileError(path, "row " + std::to_string(r + 1) + ": expected " + std::to_string(cols) +
                                       " columns, found " + std::to_string(c));
    }
    ++r;
  }
  if (r != rows) {
    throw DatasetFileError(path, "expected " + std::to_string(rows) + " rows, found " + std::to_string(r));
  }
  return out;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError(path.string() + ": cannot write file");
  std::string line;
  for (Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw OutputError(path.string() + ": write failed");
}

TwoSampleDataset load_dataset(const fs::path& dir) {
  const Manifest man = read_manifest(dir);
  std::vector<std::string> files = man.treatment;
  files.insert(files.end(), man.control.begin(), man.control.end());

  std::vector<Matrix> mats(files.size());
  std::vector<std::optional<DatasetFileError>> errs(files.size());
  const auto count = static_cast<long long>(files.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (long long k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      mats[idx] = read_matrix_csv(dir / files[idx], man.p, man.q);
    } catch (const DatasetFileError& e) {
      errs[idx] = e;
    }
  }
  for (const auto& e : errs) {
    if (e) throw *e;
  }

  TwoSampleDataset ds;
  ds.treatment.assign(std::make_move_iterator(mats.begin()),
                      std::make_move_iterator(mats.begin() + static_cast<std::ptrdiff_t>(man.treatment.size())));
  ds.control.assign(std::make_move_iterator(mats.begin() + static_cast<std::ptrdiff_t>(man.treatment.size())),
                    std::make_move_iterator(mats.end()));
  try {
    ds.validate();
  } catch (const InvalidDataset& e) {
    throw DatasetFileError(dir / "manifest.json", e.what());
  }
  return ds;
}

void write_dataset(const fs::path& dir, const TwoSampleDataset& ds) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputError(dir.string() + ": cannot create directory: " + ec.message());

  json man;
  man["p"] = ds.rows();
  man["q"] = ds.cols();
  man["n"] = ds.n();
  man["m"] = ds.m();
  std::vector<std::string> tf, cf;
  auto name = [](const char* prefix, std::size_t k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03zu.csv", prefix, k);
    return std::string(buf);
  };
  for (std::size_t k = 0; k < ds.n(); ++k) {
    tf.push_back(name("treatment", k));
    write_matrix_csv(dir / tf.back(), ds.treatment[k]);
  }
  for (std::size_t k = 0; k < ds.m(); ++k) {
    cf.push_back(name("control", k));
    write_matrix_csv(dir / cf.back(), ds.control[k]);
  }
  man["treatment"] = tf;
  man["control"] = cf;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw OutputError((dir / "manifest.json").string() + ": cannot write file");
  out << man.dump(2) << '\n';
}

}  // namespace matfdp
