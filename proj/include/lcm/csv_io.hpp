#ifndef LCM_CSV_IO_HPP
#define LCM_CSV_IO_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "lcm/model.hpp"

namespace lcm {

struct LoadedResponses {
  ResponseMatrix matrix;
  bool had_header = false;
  bool max_category_inferred = false;
};

/// Reads a rectangular integer matrix. Separator is ',' if present on the
/// first line, else tab, else whitespace. Row 1 is treated as a header when
/// any of its tokens is not an integer. Without `max_category`, M is the
/// observed maximum (at least 1). Errors carry 1-based line/column numbers.
LoadedResponses load_response_csv(const std::filesystem::path& path,
                                  std::optional<int> max_category = {});

/// Comma-separated, no header. load_response_csv(write(...)) round-trips.
void write_response_csv(const std::filesystem::path& path,
                        const ResponseMatrix& r);

/// Real matrix with an optional header line; values printed with %.17g.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::string& header = {});

/// One label per line, written 1-based, with a "label" header.
void write_labels_csv(const std::filesystem::path& path, const Labels& labels);

/// Shortest round-trip formatting used across all output files.
std::string format_double(double x);

}  // namespace lcm

#endif  // LCM_CSV_IO_HPP
