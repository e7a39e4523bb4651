#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scidnet/common.hpp"

namespace scidnet {

/// n x p feature matrix with a continuous response. Treated as immutable once
/// validated; pipeline stages take it by const reference.
struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> feature_names;  // empty or exactly p entries

  Index n() const { return static_cast<Index>(x.rows()); }
  Index p() const { return static_cast<Index>(x.cols()); }

  /// Row subset, keeping feature names.
  Dataset rows(const IndexList& idx) const;
};

/// True support S0, 0-based.
struct TruthSpec {
  IndexList s0;
};

/// Throws DataError describing the first violated invariant.
void validate(const Dataset& data);

/// Reads a comma-separated file with a header row. The response column is
/// removed; every other column becomes a feature in file order.
Dataset load_csv(const std::filesystem::path& path, const std::string& response_column);

/// Writes the response first (named `response_column`) followed by features.
/// Values use the shortest round-trip decimal representation.
void write_csv(const Dataset& data, const std::filesystem::path& path,
               const std::string& response_column = "y");

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace scidnet
