// CSV ingestion, covariate standardization and JSON result
// serialization for the command-line front end.
#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "epglm/engine.hpp"
#include "epglm/predict.hpp"

namespace epglm {

// Raised for malformed input files; the CLI maps it to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> column_names;  // synthesized c1..cK without header
  Eigen::MatrixXd values;                 // n x K numeric cells
};

// Strict numeric CSV: comma separator, '.' decimal point, optional
// header. Ragged rows, empty files and non-numeric cells (incl. NA) are
// rejected with the offending row/column named.
CsvTable load_csv(const std::string& path, bool header);

// Column selection helpers; names resolve against the header, otherwise
// 1-based indices are accepted.
Eigen::Index resolve_column(const CsvTable& table, const std::string& spec);

// Per-column affine transform x -> (x - offset) / scale recorded at fit
// time and replayed on prediction queries.
struct Standardization {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

// Gelman-style scaling: each non-intercept column is centered and
// divided by twice its sample (n-1) standard deviation. When intercept
// is true, column 0 is left untouched. Constant columns are rejected by
// name.
Standardization standardize(Eigen::MatrixXd& X, bool intercept,
                            const std::vector<std::string>& names);

struct FitDocument {
  ModelKind model = ModelKind::probit;
  double nu2 = 1.0;
  EPResult result;
  std::optional<Standardization> transform;
  bool intercept = false;
  double gamma_shape = 1.0;  // constant-shape fits only
};

// Versioned JSON ("ep-glm/1"). wall_time_s, when nonnegative, lands in
// the diagnostics block.
std::string fit_to_json(const FitDocument& doc, bool full_covariance,
                        double wall_time_s);
FitDocument fit_from_json(const std::string& text);

std::string predictions_to_json(const std::vector<double>& values,
                                ModelKind model, bool probit_plugin);

}  // namespace epglm
