#include "scidnet/dataset.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace scidnet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset Dataset::rows(const IndexList& idx) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(idx[r]);
    out.x.row(static_cast<Eigen::Index>(r)) = x.row(src);
    out.y(static_cast<Eigen::Index>(r)) = y(src);
  }
  out.feature_names = feature_names;
  return out;
}

void validate(const Dataset& data) {
  if (data.x.cols() == 0) throw DataError("no features (p = 0)");
  if (data.y.size() != data.x.rows()) {
    std::ostringstream msg;
    msg << "response length " << data.y.size() << " does not match row count "
        << data.x.rows();
    throw DataError(msg.str());
  }
  if (data.x.rows() < 2) throw DataError("n < 2: at least two observations are required");
  if (!data.feature_names.empty() &&
      data.feature_names.size() != static_cast<std::size_t>(data.x.cols())) {
    throw DataError("feature_names has " + std::to_string(data.feature_names.size()) +
                    " entries but p = " + std::to_string(data.x.cols()));
  }
  for (Eigen::Index i = 0; i < data.y.size(); ++i) {
    if (!std::isfinite(data.y(i))) {
      throw DataError("non-finite response at index " + std::to_string(i + 1));
    }
  }
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
    for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
      if (!std::isfinite(data.x(i, j))) {
        std::ostringstream msg;
        msg << "non-finite feature value at row " << i + 1 << ", col " << j + 1;
        throw DataError(msg.str());
      }
    }
  }
}

Dataset load_csv(const std::filesystem::path& path, const std::string& response_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty data file: " + path.string());
  const auto header = split_commas(line);

  std::ptrdiff_t response_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == response_column) {
      response_idx = static_cast<std::ptrdiff_t>(c);
      break;
    }
  }
  if (response_idx < 0) {
    throw DataError("response column '" + response_column + "' not found in header");
  }

  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) != response_idx) {
      data.feature_names.emplace_back(header[c]);
    }
  }

  std::vector<double> values;
  std::vector<double> response;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << row << " has " << cells.size() << " cells, expected " << header.size();
      throw DataError(msg.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-numeric cell at row " << row << ", col " << c + 1;
        throw DataError(msg.str());
      }
      if (static_cast<std::ptrdiff_t>(c) == response_idx) {
        response.push_back(v);
      } else {
        values.push_back(v);
      }
    }
  }
  if (row < 2) throw DataError("n < 2: data file has " + std::to_string(row) + " data row(s)");

  const auto n = static_cast<Eigen::Index>(row);
  const auto p = static_cast<Eigen::Index>(data.feature_names.size());
  data.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, p);
  data.y = Eigen::Map<const Vector>(response.data(), n);
  validate(data);
  return data;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("failed to format value");
  return {buf.data(), ptr};
}

void write_csv(const Dataset& data, const std::filesystem::path& path,
               const std::string& response_column) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write data file: " + path.string());
  out << response_column;
  for (Index j = 0; j < data.p(); ++j) {
    out << ',';
    if (data.feature_names.empty()) {
      out << 'x' << j + 1;
    } else {
      out << data.feature_names[j];
    }
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    out << format_double(data.y(i));
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) out << ',' << format_double(data.x(i, j));
    out << '\n';
  }
}

}  // namespace scidnet
