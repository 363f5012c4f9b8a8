#include "lcm/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "lcm/errors.hpp"

namespace lcm {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  if (sep == ' ') {
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::optional<int> parse_int(const std::string& tok) {
  int value = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

LoadedResponses load_response_csv(const std::filesystem::path& path,
                                  std::optional<int> max_category) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");

  std::vector<std::vector<int>> rows;
  std::string line;
  char sep = 0;
  bool had_header = false;
  int line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (sep == 0) {
      sep = line.find(',') != std::string::npos    ? ','
            : line.find('\t') != std::string::npos ? '\t'
                                                   : ' ';
    }
    const std::vector<std::string> tokens = split(line, sep);
    if (rows.empty() && !had_header) {
      bool all_int = true;
      for (const auto& t : tokens) all_int = all_int && parse_int(t).has_value();
      if (!all_int) {
        had_header = true;
        width = tokens.size();
        continue;
      }
    }
    if (width == 0) width = tokens.size();
    if (tokens.size() != width) {
      throw InputError(path.string() + ": line " + std::to_string(line_no) +
                       " has " + std::to_string(tokens.size()) +
                       " fields, expected " + std::to_string(width));
    }
    std::vector<int> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      auto v = parse_int(tokens[c]);
      if (!v) {
        throw InputError(path.string() + ": line " + std::to_string(line_no) +
                         ", column " + std::to_string(c + 1) +
                         ": non-integer value '" + tokens[c] + "'");
      }
      if (*v < 0 || (max_category && *v > *max_category)) {
        throw InputError(path.string() + ": line " + std::to_string(line_no) +
                         ", column " + std::to_string(c + 1) + ": value " +
                         std::to_string(*v) + " outside {0,...," +
                         (max_category ? std::to_string(*max_category) : "M") +
                         "}");
      }
      row[c] = *v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": no data rows");

  IntMatrix data(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) data(i, j) = rows[i][j];
  }
  LoadedResponses out;
  out.had_header = had_header;
  int m = 0;
  if (max_category) {
    m = *max_category;
  } else {
    m = std::max(1, data.maxCoeff());
    out.max_category_inferred = true;
  }
  out.matrix = ResponseMatrix(std::move(data), m);
  return out;
}

void write_response_csv(const std::filesystem::path& path,
                        const ResponseMatrix& r) {
  std::ofstream out = open_out(path);
  for (int i = 0; i < r.n_subjects(); ++i) {
    for (int j = 0; j < r.n_items(); ++j) {
      if (j) out << ',';
      out << r(i, j);
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::string& header) {
  std::ofstream out = open_out(path);
  if (!header.empty()) out << header << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_labels_csv(const std::filesystem::path& path, const Labels& labels) {
  std::ofstream out = open_out(path);
  out << "label\n";
  for (int l : labels) out << (l + 1) << '\n';
}

}  // namespace lcm
