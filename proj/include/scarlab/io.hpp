#pragma once

// Artifact files: CSV tables with a '#' metadata header, atomic writes, the trained-model
// document and the binary eigenset archive.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scarlab/qcnn.hpp"
#include "scarlab/spectra.hpp"

namespace scarlab {

std::string tool_version();

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);
// Exact hexadecimal floating-point text ("%a") and its inverse.
std::string hexfloat(double value);
double parse_hexfloat(const std::string& text);

// 16 hex digits of the FNV-1a hash of `text`.
std::string content_hash(const std::string& text);

struct ArtifactHeader {
  std::string schema;
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;  // further "# key: value" lines in order

  nlohmann::json to_json() const;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;  // throws Io when absent
};

// '#' header lines (schema, tool_version, config_hash, seed, columns, extras), then the header
// row and data rows; comma separated, LF line ends.
std::string render_csv(const ArtifactHeader& header, const CsvTable& table);

struct ParsedCsv {
  ArtifactHeader header;
  CsvTable table;
};

ParsedCsv parse_csv(const std::string& text);

// Column layout of each CSV artifact. Columns listed in `fixed` come first in order; columns
// matching `prefixes` may follow in any number; `tail` closes the row.
struct CsvSchema {
  std::string name;
  std::vector<std::string> fixed;
  std::vector<std::string> prefixes;
  std::vector<std::string> tail;
};

const CsvSchema& csv_schema(const std::string& name);
// Throws Io when the header names another schema, the columns do not fit the layout, or a row
// has the wrong width.
void validate_csv(const ParsedCsv& csv, const std::string& schema);

// Write to a sibling temporary file and rename over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Trained-model document: architecture, parameters (hex-float strings), training metadata.
struct StoredModel {
  CircuitSpec spec;
  ParamVector theta;
  OptimizerState optimizer;
  long iterations_done = 0;
  nlohmann::json training;
};

nlohmann::json model_to_json(const StoredModel& model, const ArtifactHeader& header);
// Throws Config on any malformed or inconsistent field.
StoredModel model_from_json(const nlohmann::json& j);

// Binary archive of energies, eigenvectors and the basis configurations.
void write_eigenset(const std::filesystem::path& path, const EigenSet& eigs);
EigenSet read_eigenset(const std::filesystem::path& path);

}  // namespace scarlab
