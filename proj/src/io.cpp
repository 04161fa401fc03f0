#include "epglm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace epglm {

namespace {

using ordered_json = nlohmann::ordered_json;

bool parse_double(const std::string& cell, double* out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  if (begin == end) return false;
  const auto res = std::from_chars(begin, end, *out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd vector_from_json(const ordered_json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& rows) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(i, j) = rows[i][j].get<double>();
    }
  }
  return m;
}

}  // namespace

CsvTable load_csv(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file: " + path);

  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t ncol = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (lineno == 1 && header) {
      table.column_names = cells;
      ncol = cells.size();
      continue;
    }
    if (ncol == 0) ncol = cells.size();
    if (cells.size() != ncol) {
      throw InputError("ragged row at line " + std::to_string(lineno) + ": got " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(ncol));
    }
    std::vector<double> row(ncol);
    for (std::size_t j = 0; j < ncol; ++j) {
      if (!parse_double(cells[j], &row[j])) {
        throw InputError("malformed numeric value '" + cells[j] + "' at line " +
                         std::to_string(lineno) + ", column " +
                         std::to_string(j + 1));
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("empty data file: " + path);

  if (table.column_names.empty()) {
    for (std::size_t j = 0; j < ncol; ++j) {
      table.column_names.push_back("c" + std::to_string(j + 1));
    }
  }
  table.values.resize(rows.size(), ncol);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < ncol; ++j) table.values(i, j) = rows[i][j];
  }
  return table;
}

Eigen::Index resolve_column(const CsvTable& table, const std::string& spec) {
  for (std::size_t j = 0; j < table.column_names.size(); ++j) {
    if (table.column_names[j] == spec) return static_cast<Eigen::Index>(j);
  }
  int idx = 0;
  const auto res = std::from_chars(spec.data(), spec.data() + spec.size(), idx);
  if (res.ec == std::errc() && res.ptr == spec.data() + spec.size() &&
      idx >= 1 && idx <= static_cast<int>(table.column_names.size())) {
    return idx - 1;
  }
  throw InputError("unknown column: " + spec);
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != offset.size()) {
    throw InputError("standardization transform does not match query width");
  }
  Eigen::MatrixXd out = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    out.col(j) = (X.col(j).array() - offset(j)) / scale(j);
  }
  return out;
}

Standardization standardize(Eigen::MatrixXd& X, bool intercept,
                            const std::vector<std::string>& names) {
  const Eigen::Index p = X.cols();
  const Eigen::Index n = X.rows();
  Standardization tr;
  tr.offset = Eigen::VectorXd::Zero(p);
  tr.scale = Eigen::VectorXd::Ones(p);
  if (n < 2) throw InputError("standardization needs at least two rows");
  for (Eigen::Index j = intercept ? 1 : 0; j < p; ++j) {
    const double mean = X.col(j).mean();
    const double ss = (X.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      const std::string name =
          j < static_cast<Eigen::Index>(names.size()) ? names[j]
                                                      : std::to_string(j + 1);
      throw InputError("constant column cannot be standardized: " + name);
    }
    tr.offset(j) = mean;
    tr.scale(j) = 2.0 * sd;
    X.col(j) = (X.col(j).array() - mean) / (2.0 * sd);
  }
  return tr;
}

std::string fit_to_json(const FitDocument& doc, bool full_covariance,
                        double wall_time_s) {
  ordered_json j;
  j["schema"] = "ep-glm/1";
  j["model"] = to_string(doc.model);
  j["prior_variance"] = doc.nu2;
  j["intercept"] = doc.intercept;
  if (doc.model == ModelKind::gamma) j["gamma_shape"] = doc.gamma_shape;

  j["posterior_mean"] = vector_to_json(doc.result.xi);
  Eigen::VectorXd sd = doc.result.omega_diag.cwiseMax(0.0).cwiseSqrt();
  j["posterior_sd"] = vector_to_json(sd);
  if (full_covariance && doc.result.omega.size() > 0) {
    j["posterior_covariance"] = matrix_to_json(doc.result.omega);
  }
  j["log_marginal_likelihood"] = doc.result.log_ml;

  ordered_json diag;
  diag["converged"] = doc.result.converged;
  diag["sweeps"] = doc.result.sweeps;
  diag["skipped_sites"] = doc.result.skipped_sites;
  diag["max_site_delta"] = doc.result.max_site_delta;
  diag["kernel"] = to_string(doc.result.kernel_used);
  if (wall_time_s >= 0.0) diag["wall_time_s"] = wall_time_s;
  j["diagnostics"] = diag;

  if (doc.transform) {
    ordered_json tr;
    tr["offset"] = vector_to_json(doc.transform->offset);
    tr["scale"] = vector_to_json(doc.transform->scale);
    j["standardization"] = tr;
  }

  // Everything a later `predict` invocation needs to reproduce the fit's
  // quadratic forms exactly.
  ordered_json st;
  st["kind"] = to_string(doc.result.state.kind);
  st["nu2"] = doc.result.state.nu2;
  if (doc.result.state.kind == KernelKind::dense) {
    st["omega"] = matrix_to_json(doc.result.state.omega);
  } else {
    st["V"] = matrix_to_json(doc.result.state.V);
    st["X"] = matrix_to_json(doc.result.state.X);
    st["k"] = vector_to_json(doc.result.state.k);
  }
  j["predictor_state"] = st;

  return j.dump(2) + "\n";
}

FitDocument fit_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw InputError(std::string("invalid fit JSON: ") + e.what());
  }
  if (!j.contains("schema") || j["schema"] != "ep-glm/1") {
    throw InputError("unsupported fit schema (expected ep-glm/1)");
  }
  FitDocument doc;
  doc.model = model_kind_from_string(j.at("model").get<std::string>());
  doc.nu2 = j.at("prior_variance").get<double>();
  doc.intercept = j.value("intercept", false);
  doc.gamma_shape = j.value("gamma_shape", 1.0);
  doc.result.xi = vector_from_json(j.at("posterior_mean"));
  const Eigen::VectorXd sd = vector_from_json(j.at("posterior_sd"));
  doc.result.omega_diag = sd.array().square();
  doc.result.log_ml = j.at("log_marginal_likelihood").get<double>();
  const auto& diag = j.at("diagnostics");
  doc.result.converged = diag.at("converged").get<bool>();
  doc.result.sweeps = diag.at("sweeps").get<int>();
  doc.result.skipped_sites = diag.at("skipped_sites").get<int>();
  doc.result.max_site_delta = diag.at("max_site_delta").get<double>();
  doc.result.kernel_used = diag.at("kernel").get<std::string>() == "dense"
                               ? KernelKind::dense
                               : KernelKind::lowrank;
  if (j.contains("posterior_covariance")) {
    doc.result.omega = matrix_from_json(j["posterior_covariance"]);
  }
  if (j.contains("standardization")) {
    Standardization tr;
    tr.offset = vector_from_json(j["standardization"].at("offset"));
    tr.scale = vector_from_json(j["standardization"].at("scale"));
    doc.transform = tr;
  }
  const auto& st = j.at("predictor_state");
  doc.result.state.nu2 = st.at("nu2").get<double>();
  if (st.at("kind").get<std::string>() == "dense") {
    doc.result.state.kind = KernelKind::dense;
    doc.result.state.omega = matrix_from_json(st.at("omega"));
  } else {
    doc.result.state.kind = KernelKind::lowrank;
    doc.result.state.V = matrix_from_json(st.at("V"));
    doc.result.state.X = matrix_from_json(st.at("X"));
    doc.result.state.k = vector_from_json(st.at("k"));
  }
  return doc;
}

std::string predictions_to_json(const std::vector<double>& values,
                                ModelKind model, bool probit_plugin) {
  ordered_json j;
  j["schema"] = "ep-glm/1";
  j["model"] = to_string(model);
  if (is_binary(model)) {
    j["quantity"] = "predictive_probability";
    if (model == ModelKind::logit) {
      j["method"] = probit_plugin ? "probit-plugin" : "logistic-approximation";
      // The logistic closed form extends the fitting approximation; it is
      // not an exact posterior functional like the probit one.
      j["approximate"] = true;
    }
  } else {
    j["quantity"] = "predictive_mean";
  }
  j["values"] = values;
  return j.dump(2) + "\n";
}

}  // namespace epglm
