#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "msfem/config.hpp"
#include "msfem/metrics.hpp"

namespace msfem {

struct CsvRow {
  double alpha = 0.0;
  std::string method;
  std::string pathway;
  ErrorReport errors;
  double offline_seconds = 0.0;
  double online_seconds = 0.0;
  bool singular = false;
};

// 17 significant digits, so values round-trip exactly.
std::string format_double(double v);
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const CsvRow& row);

// Reuses meshes per fine level and basis stores per offline key within one session.
class Session {
 public:
  explicit Session(RunConfig config);

  const RunConfig& config() const { return config_; }
  const NestedMeshes& meshes(double alpha);
  // Offline stage for alpha; seconds is the time spent by this call (0 when cached).
  const BasisStore& store(const Problem& problem, double alpha, double* seconds = nullptr);
  const BrokenField& reference(const Problem& problem, double alpha);

 private:
  RunConfig config_;
  std::map<int, std::unique_ptr<NestedMeshes>> meshes_;
  std::map<std::string, std::unique_ptr<BasisStore>> stores_;
  std::map<std::string, BrokenField> references_;
};

struct RunOutput {
  std::vector<CsvRow> rows;
  bool any_singular = false;
};

// One row per (alpha, method). Writes config.output and the field dumps when configured.
RunOutput run(const RunConfig& config, std::ostream* log = nullptr);

// Per fine vertex of the global mesh: "x [y] recon p1 ref".
void write_field(std::ostream& out, const NestedMeshes& meshes, const BrokenField& recon,
                 const BrokenField& p1, const BrokenField& reference);

// Writes basis, corrector and bubble files for one coarse element; returns the file names.
std::vector<std::string> dump_basis(const RunConfig& config, double alpha, Index element,
                                    const std::string& directory);

}  // namespace msfem
