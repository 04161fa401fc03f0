// epglm command line: fit Bayesian GLMs by expectation propagation,
// predict from saved fits, and generate benchmark-style synthetic data.
//
// Exit codes: 0 success, 2 input error, 3 fit finished without
// convergence (results are still written).

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epglm/engine.hpp"
#include "epglm/io.hpp"
#include "epglm/predict.hpp"
#include "epglm/simulate.hpp"

namespace {

using namespace epglm;

struct FitArgs {
  std::string model = "probit";
  std::string data_path;
  std::string response = "1";
  std::vector<std::string> covariates;
  bool header = false;
  double prior_var = 0.0;
  double prior_var_over_p = 0.0;
  std::string kernel = "auto";
  double tol = 1e-6;
  int max_sweeps = 200;
  double damping = 1.0;
  bool standardize_flag = false;
  bool intercept = false;
  double gamma_shape = 0.0;
  std::string gamma_shape_col;
  double poisson_threshold = 0.5;
  bool full_covariance = false;
  bool quadrature = false;
  std::string predict_path;
  bool probit_plugin = false;
  std::string out_path = "fit.json";
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write output file: " + path);
  out << text;
}

Eigen::MatrixXd load_queries(const std::string& path, bool header,
                             bool intercept, Eigen::Index p) {
  const CsvTable table = load_csv(path, header);
  Eigen::MatrixXd Q = table.values;
  if (intercept) {
    Eigen::MatrixXd with_one(Q.rows(), Q.cols() + 1);
    with_one.col(0).setOnes();
    with_one.rightCols(Q.cols()) = Q;
    Q = with_one;
  }
  if (Q.cols() != p) {
    throw InputError("prediction rows have " + std::to_string(Q.cols()) +
                     " columns, fit expects " + std::to_string(p));
  }
  return Q;
}

int run_fit(const FitArgs& args) {
  const ModelKind kind = model_kind_from_string(args.model);
  const CsvTable table = load_csv(args.data_path, args.header);

  const Eigen::Index y_col = resolve_column(table, args.response);
  std::vector<Eigen::Index> x_cols;
  std::optional<Eigen::Index> shape_col;
  if (!args.gamma_shape_col.empty()) {
    shape_col = resolve_column(table, args.gamma_shape_col);
  }
  if (args.covariates.empty()) {
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
      if (j != y_col && (!shape_col || j != *shape_col)) x_cols.push_back(j);
    }
  } else {
    for (const std::string& spec : args.covariates) {
      x_cols.push_back(resolve_column(table, spec));
    }
  }
  if (x_cols.empty()) throw InputError("no covariate columns selected");

  Dataset data;
  data.y = table.values.col(y_col);
  const Eigen::Index raw_p = static_cast<Eigen::Index>(x_cols.size());
  data.X.resize(table.values.rows(), raw_p + (args.intercept ? 1 : 0));
  if (args.intercept) data.X.col(0).setOnes();
  for (Eigen::Index j = 0; j < raw_p; ++j) {
    data.X.col(j + (args.intercept ? 1 : 0)) = table.values.col(x_cols[j]);
  }
  data.model.kind = kind;

  double const_shape = 1.0;
  if (kind == ModelKind::gamma) {
    if (shape_col) {
      data.model.shape = table.values.col(*shape_col);
    } else if (args.gamma_shape > 0.0) {
      const_shape = args.gamma_shape;
      data.model.shape = Eigen::VectorXd::Constant(data.n(), args.gamma_shape);
    } else {
      throw InputError("gamma model needs --gamma-shape or --gamma-shape-col");
    }
  } else if (args.gamma_shape > 0.0 || shape_col) {
    throw InputError("gamma shape options only apply to --model gamma");
  }

  std::vector<std::string> names;
  if (args.intercept) names.push_back("(intercept)");
  for (const Eigen::Index j : x_cols) names.push_back(table.column_names[j]);

  std::optional<Standardization> transform;
  if (args.standardize_flag) {
    transform = standardize(data.X, args.intercept, names);
  }

  Prior prior;
  if (args.prior_var > 0.0 && args.prior_var_over_p > 0.0) {
    throw InputError("--prior-var and --prior-var-over-p are exclusive");
  }
  if (args.prior_var > 0.0) {
    prior.nu2 = args.prior_var;
  } else if (args.prior_var_over_p > 0.0) {
    prior.nu2 = args.prior_var_over_p / static_cast<double>(data.p());
  } else {
    throw InputError("set a prior with --prior-var or --prior-var-over-p");
  }

  EPConfig config;
  config.tol = args.tol;
  config.max_sweeps = args.max_sweeps;
  config.damping = args.damping;
  config.kernel = kernel_choice_from_string(args.kernel);
  config.poisson_threshold = args.poisson_threshold;
  config.use_quadrature_fallback = args.quadrature;
  config.keep_state = true;
  config.full_covariance = args.full_covariance;

  try {
    data.validate();
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }

  const auto t0 = std::chrono::steady_clock::now();
  const EPResult result = run_ep(data, prior, config);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  FitDocument doc;
  doc.model = kind;
  doc.nu2 = prior.nu2;
  doc.result = result;
  doc.transform = transform;
  doc.intercept = args.intercept;
  doc.gamma_shape = const_shape;
  write_file(args.out_path, fit_to_json(doc, args.full_covariance, wall));

  std::cerr << "fit: kernel=" << to_string(result.kernel_used)
            << " sweeps=" << result.sweeps
            << " converged=" << (result.converged ? "yes" : "no")
            << " skipped=" << result.skipped_sites
            << " log_ml=" << result.log_ml << " wall=" << wall << "s\n";

  if (!args.predict_path.empty()) {
    Eigen::MatrixXd Q =
        load_queries(args.predict_path, args.header, args.intercept, data.p());
    if (transform) Q = transform->apply(Q);
    const Predictor pred = make_predictor(kind, result);
    std::vector<double> values;
    values.reserve(Q.rows());
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
      values.push_back(predict(pred, Q.row(i).transpose(), args.probit_plugin));
    }
    const std::string pred_path = args.out_path + ".predictions.json";
    write_file(pred_path, predictions_to_json(values, kind, args.probit_plugin));
    std::cerr << "predictions written to " << pred_path << "\n";
  }

  return result.converged ? 0 : 3;
}

int run_predict(const std::string& fit_path, const std::string& query_path,
                bool header, bool probit_plugin, const std::string& out_path) {
  std::ifstream in(fit_path, std::ios::binary);
  if (!in) throw InputError("cannot open fit file: " + fit_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const FitDocument doc = fit_from_json(text);

  const Eigen::Index p = doc.result.xi.size();
  Eigen::MatrixXd Q = load_queries(query_path, header, doc.intercept, p);
  if (doc.transform) Q = doc.transform->apply(Q);

  Predictor pred = make_predictor(doc.model, doc.result);
  std::vector<double> values;
  values.reserve(Q.rows());
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    values.push_back(predict(pred, Q.row(i).transpose(), probit_plugin));
  }
  write_file(out_path, predictions_to_json(values, doc.model, probit_plugin));
  std::cerr << Q.rows() << " predictions written to " << out_path << "\n";
  return 0;
}

int run_simulate(const std::string& model, long n, long p, long n_test,
                 double gamma_shape, std::uint64_t seed,
                 const std::string& out_path) {
  SimulateConfig config;
  config.model = model_kind_from_string(model);
  config.n = n;
  config.p = p;
  config.n_test = n_test;
  config.gamma_shape = gamma_shape;
  config.seed = seed;
  const SimulatedData sim = simulate(config);

  // Training CSV: response first, then the p-1 non-intercept covariates
  // (the intercept is re-added at fit time with --intercept).
  std::ostringstream train;
  train << "y";
  for (Eigen::Index j = 1; j < sim.data.p(); ++j) train << ",x" << j;
  train << "\n";
  train.precision(17);
  for (Eigen::Index i = 0; i < sim.data.n(); ++i) {
    train << sim.data.y(i);
    for (Eigen::Index j = 1; j < sim.data.p(); ++j) train << "," << sim.data.X(i, j);
    train << "\n";
  }
  write_file(out_path, train.str());

  if (n_test > 0) {
    std::ostringstream test;
    for (Eigen::Index j = 1; j < sim.data.p(); ++j) {
      test << (j > 1 ? "," : "") << "x" << j;
    }
    test << "\n";
    test.precision(17);
    for (Eigen::Index i = 0; i < sim.X_test.rows(); ++i) {
      for (Eigen::Index j = 1; j < sim.data.p(); ++j) {
        test << (j > 1 ? "," : "") << sim.X_test(i, j);
      }
      test << "\n";
    }
    write_file(out_path + ".test.csv", test.str());
  }
  std::cerr << "simulated " << model << " data: n=" << n << " p=" << p
            << " (intercept implicit) -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expectation-propagation fitting for Bayesian GLMs"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model to CSV data");
  fit_cmd->add_option("--model", fit_args.model, "probit|logit|poisson|gamma");
  fit_cmd->add_option("--data", fit_args.data_path, "training CSV")->required();
  fit_cmd->add_option("--response", fit_args.response,
                      "response column (name or 1-based index)");
  fit_cmd->add_option("--covariates", fit_args.covariates,
                      "covariate columns; default: all non-response columns");
  fit_cmd->add_flag("--header", fit_args.header, "first CSV row is a header");
  fit_cmd->add_option("--prior-var", fit_args.prior_var, "prior variance nu^2");
  fit_cmd->add_option("--prior-var-over-p", fit_args.prior_var_over_p,
                      "prior variance as c/p");
  fit_cmd->add_option("--kernel", fit_args.kernel, "auto|dense|lowrank");
  fit_cmd->add_option("--tol", fit_args.tol, "convergence tolerance");
  fit_cmd->add_option("--max-sweeps", fit_args.max_sweeps, "sweep limit");
  fit_cmd->add_option("--damping", fit_args.damping, "site damping in (0,1]");
  fit_cmd->add_flag("--standardize", fit_args.standardize_flag,
                    "center covariates and scale to sd 0.5");
  fit_cmd->add_flag("--intercept", fit_args.intercept, "prepend a ones column");
  fit_cmd->add_option("--gamma-shape", fit_args.gamma_shape,
                      "constant gamma shape");
  fit_cmd->add_option("--gamma-shape-col", fit_args.gamma_shape_col,
                      "per-row gamma shape column");
  fit_cmd->add_option("--poisson-threshold", fit_args.poisson_threshold,
                      "expansion branch threshold for y=0 sites");
  fit_cmd->add_flag("--full-covariance", fit_args.full_covariance,
                    "write the full posterior covariance");
  fit_cmd->add_flag("--quadrature", fit_args.quadrature,
                    "use quadrature tilted moments for all sites");
  fit_cmd->add_option("--predict", fit_args.predict_path,
                      "CSV of query rows to predict after fitting");
  fit_cmd->add_flag("--probit-plugin", fit_args.probit_plugin,
                    "use the probit-style composition for logit predictions");
  fit_cmd->add_option("--out", fit_args.out_path, "output JSON path");

  std::string pr_fit, pr_queries, pr_out = "predictions.json";
  bool pr_header = false, pr_plugin = false;
  CLI::App* pred_cmd = app.add_subcommand("predict", "predict from a saved fit");
  pred_cmd->add_option("--fit", pr_fit, "fit JSON from a previous run")->required();
  pred_cmd->add_option("--predict", pr_queries, "CSV of query rows")->required();
  pred_cmd->add_flag("--header", pr_header, "query CSV has a header row");
  pred_cmd->add_flag("--probit-plugin", pr_plugin,
                     "probit-style composition for logit predictions");
  pred_cmd->add_option("--out", pr_out, "output JSON path");

  std::string sim_model = "probit", sim_out = "sim.csv";
  long sim_n = 100, sim_p = 20, sim_test = 0;
  double sim_shape = 2.0;
  std::uint64_t sim_seed = 1;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "generate synthetic data");
  sim_cmd->add_option("--model", sim_model, "probit|logit|poisson|gamma");
  sim_cmd->add_option("--n", sim_n, "training rows");
  sim_cmd->add_option("--p", sim_p, "columns including the intercept");
  sim_cmd->add_option("--n-test", sim_test, "held-out query rows");
  sim_cmd->add_option("--gamma-shape", sim_shape, "gamma shape");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--out", sim_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (pred_cmd->parsed()) {
      return run_predict(pr_fit, pr_queries, pr_header, pr_plugin, pr_out);
    }
    return run_simulate(sim_model, sim_n, sim_p, sim_test, sim_shape, sim_seed,
                        sim_out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
