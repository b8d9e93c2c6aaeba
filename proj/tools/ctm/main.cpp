#include "ctm/csv.hpp"
#include "ctm/data_model.hpp"
#include "ctm/experiments.hpp"
#include "ctm/persist.hpp"
#include "ctm/scoring.hpp"
#include "ctm/transition.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr const char* kVersion = "ctm 1.0.0";

using nlohmann::json;

std::string resolve_data_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("CTM_DATA_DIR")) {
    const fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// Every output <file> gets a sibling <file>.manifest.json recording the
// resolved invocation, so a run can be reproduced from the manifest alone.
void write_manifest(const std::string& out_path, const std::string& command,
                    const json& options, std::uint64_t seed,
                    const std::vector<std::string>& inputs) {
  json j;
  j["tool"] = kVersion;
  j["command"] = command;
  j["options"] = options;
  j["seed"] = seed;
  json in = json::object();
  for (const auto& p : inputs) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(p)));
    in[p] = std::string("fnv1a64:") + buf;
  }
  j["inputs"] = in;
  j["outputs"] = json::array({out_path});
  const auto now = std::chrono::system_clock::now();
  j["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                            now.time_since_epoch())
                            .count();
  std::ofstream out(out_path + ".manifest.json");
  out << j.dump(1) << "\n";
}

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

void print_table(const std::vector<ctm::CoefficientRow>& rows) {
  std::printf("%-22s %10s %10s %10s\n", "", "coef", "se", "z-value");
  for (const auto& r : rows) {
    if (r.se_suppressed)
      std::printf("%-22s %10s %10s %10s\n", r.name.c_str(), fmt(r.coef).c_str(), "---", "---");
    else if (r.se == 0.0 && r.z == 0.0)
      std::printf("%-22s %10s %10s %10s\n", r.name.c_str(), fmt(r.coef).c_str(), "", "");
    else
      std::printf("%-22s %10s %10s %10s\n", r.name.c_str(), fmt(r.coef).c_str(),
                  fmt(r.se).c_str(), fmt(r.z).c_str());
  }
}

struct FitOptions {
  std::string data;
  std::string schema;
  std::string model = "transition";
  std::string outcome;
  std::string lambda = "cv";
  std::string link = "logit";
  std::string smoother = "psplines";
  int num_basis = 0;
  int degree = 3;
  int diff_order = 1;
  int M = 0;
  int max_iter = 200;
  bool sandwich = false;
  std::string varying;       // comma-separated design columns
  std::string lambda_terms;  // comma-separated per-term lambdas
  std::string grid;          // cv grid override
  std::uint64_t seed = 1;
  int cv_reps = 100;
  double fraction = 2.0 / 3.0;
  int train_size = 0;
  int r_max = 30;
  int jobs = 1;
  std::string out = "model.json";
  std::string curves;
};

void add_transition_flags(CLI::App* cmd, FitOptions& o) {
  cmd->add_option("--link", o.link, "logit | cloglog");
  cmd->add_option("--smoother", o.smoother, "psplines | quadratic");
  cmd->add_option("--num-basis", o.num_basis, "basis functions (0: min(20, M+1))");
  cmd->add_option("--degree", o.degree, "B-spline degree");
  cmd->add_option("--diff-order", o.diff_order, "difference penalty order (1 or 2)");
  cmd->add_option("--M", o.M, "top category (0: closest integer to 1.2 * max Y)");
  cmd->add_option("--max-iter", o.max_iter, "Fisher scoring iteration cap");
  cmd->add_flag("--sandwich", o.sandwich, "report sandwich standard errors");
  cmd->add_option("--varying", o.varying, "columns with category-varying effects (transition-varying)");
  cmd->add_option("--lambda-terms", o.lambda_terms, "per-smooth lambdas (theta first)");
  cmd->add_option("--grid", o.grid, "cv lambda grid, comma separated");
  cmd->add_option("--seed", o.seed, "resampling seed");
  cmd->add_option("--cv-reps", o.cv_reps, "cv replications");
  cmd->add_option("--fraction", o.fraction, "training fraction");
  cmd->add_option("--train-size", o.train_size, "fixed training size (overrides fraction)");
  cmd->add_option("--r-max", o.r_max, "RPS summation cap");
  cmd->add_option("--jobs", o.jobs, "parallel replications");
}

std::vector<double> parse_grid(const std::string& s) {
  if (s.empty()) return ctm::default_lambda_grid();
  std::vector<double> grid;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
  return grid;
}

ctm::CountDataset load_dataset(const FitOptions& o) {
  const std::string path = resolve_data_path(o.data);
  ctm::DatasetSchema schema;
  if (!o.schema.empty()) {
    schema = ctm::read_schema(resolve_data_path(o.schema));
  } else {
    std::string sp = path;
    const auto dot = sp.rfind(".csv");
    if (dot != std::string::npos) sp = sp.substr(0, dot);
    schema = ctm::read_schema(sp + ".schema.json");
  }
  if (!o.outcome.empty()) {
    // moving the outcome column also removes it from the covariates
    schema.outcome = o.outcome;
    std::erase_if(schema.columns,
                  [&](const ctm::ColumnSchema& c) { return c.name == o.outcome; });
  }
  return ctm::load_csv(path, schema);
}

ctm::TransitionSpec transition_spec_from(const FitOptions& o, const ctm::CountDataset& data) {
  ctm::TransitionSpec spec;
  spec.link = o.link == "cloglog" ? ctm::Link::Cloglog : ctm::Link::Logit;
  spec.smoother = o.smoother == "quadratic" ? ctm::Smoother::ThetaQuadratic
                                            : ctm::Smoother::PSplines;
  if (o.model == "transition-zero") spec.variant = ctm::Variant::ZeroSplit;
  if (o.model == "transition-varying") spec.variant = ctm::Variant::Varying;
  spec.num_basis = o.num_basis;
  spec.degree = o.degree;
  spec.diff_order = o.diff_order;
  spec.M = o.M;
  spec.max_iter = o.max_iter;
  spec.sandwich_se = o.sandwich;
  if (spec.variant == ctm::Variant::Varying) {
    if (o.varying.empty()) {
      spec.varying_flags.assign(data.column_names.size(), true);
    } else {
      spec.varying_flags.assign(data.column_names.size(), false);
      std::stringstream ss(o.varying);
      std::string item;
      while (std::getline(ss, item, ',')) {
        bool found = false;
        for (std::size_t j = 0; j < data.column_names.size(); ++j)
          if (data.column_names[j] == item) {
            spec.varying_flags[j] = true;
            found = true;
          }
        if (!found) throw std::runtime_error("--varying: unknown design column '" + item + "'");
      }
    }
  }
  if (!o.lambda_terms.empty()) {
    std::stringstream ss(o.lambda_terms);
    std::string item;
    while (std::getline(ss, item, ',')) spec.lambda_terms.push_back(std::stod(item));
  }
  return spec;
}

double resolve_lambda(const FitOptions& o, const ctm::CountDataset& data,
                      ctm::TransitionSpec spec) {
  if (o.lambda != "cv") return std::stod(o.lambda);
  ctm::ResamplingProtocol protocol;
  protocol.replications = o.cv_reps;
  protocol.fraction = o.fraction;
  protocol.train_size = o.train_size;
  protocol.seed = o.seed;
  protocol.r_max = o.r_max;
  protocol.jobs = o.jobs;
  const auto result = ctm::select_lambda(data, spec, parse_grid(o.grid), protocol);
  std::fprintf(stderr, "cv: selected lambda = %g\n", result.lambda);
  return result.lambda;
}

json options_json(const FitOptions& o, double lambda_value) {
  json j;
  j["data"] = o.data;
  j["model"] = o.model;
  j["lambda"] = lambda_value;
  j["link"] = o.link;
  j["smoother"] = o.smoother;
  j["num_basis"] = o.num_basis;
  j["degree"] = o.degree;
  j["diff_order"] = o.diff_order;
  j["M"] = o.M;
  j["varying"] = o.varying;
  j["cv_reps"] = o.cv_reps;
  j["fraction"] = o.fraction;
  j["train_size"] = o.train_size;
  j["r_max"] = o.r_max;
  return j;
}

int run_fit(const FitOptions& o) {
  const ctm::CountDataset data = load_dataset(o);
  int exit_code = 0;
  json opts;
  if (o.model == "poisson" || o.model == "negbin" || o.model == "zip" || o.model == "hurdle") {
    ctm::BaselineFit fit;
    if (o.model == "poisson") fit = ctm::fit_poisson(data);
    else if (o.model == "negbin") fit = ctm::fit_negbin(data);
    else if (o.model == "zip") fit = ctm::fit_zip(data);
    else fit = ctm::fit_hurdle(data);
    print_table(ctm::summarize(fit));
    std::printf("loglik %s\n", fmt(fit.loglik).c_str());
    ctm::save_model(o.out, fit);
    if (!fit.converged || fit.boundary || fit.degenerate_zero_part) {
      std::fprintf(stderr, "warning: fit flagged (convergence/boundary)\n");
      exit_code = 2;
    }
    opts = options_json(o, 0.0);
  } else if (o.model == "transition" || o.model == "transition-zero" ||
             o.model == "transition-varying") {
    ctm::TransitionSpec spec = transition_spec_from(o, data);
    spec.lambda = resolve_lambda(o, data, spec);
    const ctm::FittedTransitionModel fit = ctm::fit(data, spec);
    print_table(ctm::summarize(fit));
    std::printf("loglik %s  penalized %s  lambda %g  iterations %d\n",
                fmt(fit.diag.loglik).c_str(), fmt(fit.diag.penalized_loglik).c_str(),
                fit.lambda_used, fit.diag.iterations);
    ctm::save_model(o.out, fit);
    if (!o.curves.empty()) {
      std::vector<std::string> header{"r", "theta"};
      const bool varying = fit.spec.variant == ctm::Variant::Varying;
      if (varying)
        for (const auto& nm : fit.covariate_names) header.push_back(nm);
      std::vector<std::vector<std::string>> rows;
      for (int r = 0; r <= fit.spec.M; ++r) {
        std::vector<std::string> row{std::to_string(r), fmt(fit.theta[r], 6)};
        if (varying)
          for (int j = 0; j < fit.p; ++j) row.push_back(fmt(fit.beta_curves(r, j), 6));
        rows.push_back(std::move(row));
      }
      ctm::write_csv(o.curves, header, rows);
    }
    bool any_sep = false;
    for (bool s : fit.separated) any_sep |= s;
    if (!fit.diag.converged || any_sep || fit.diag.degenerate_zero_part) {
      std::fprintf(stderr, "warning: fit flagged (convergence/separation)\n");
      exit_code = 2;
    }
    opts = options_json(o, spec.lambda);
  } else {
    throw std::runtime_error("unknown model kind: " + o.model);
  }
  write_manifest(o.out, "fit", opts, o.seed, {resolve_data_path(o.data)});
  return exit_code;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out) {
  const ctm::AnyModel any = ctm::load_model(resolve_data_path(model_path));
  const ctm::CsvTable table = ctm::read_csv(resolve_data_path(data_path));
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  ctm::PredictedDistribution pred;
  if (std::holds_alternative<ctm::FittedTransitionModel>(any)) {
    const auto& m = std::get<ctm::FittedTransitionModel>(any);
    const ctm::MatrixXd X = ctm::encode_rows(m.encoder, table.header, table.rows);
    pred = ctm::predict_pmf(m, X);
  } else {
    const auto& m = std::get<ctm::BaselineFit>(any);
    const ctm::MatrixXd X = ctm::encode_rows(m.encoder, table.header, table.rows);
    int M = 0;
    for (const auto& e : m.encoder) (void)e;
    // baselines need an explicit truncation point; use 1.2x the largest
    // predicted mean, floor 30
    ctm::PredictedDistribution tmp = ctm::predict_pmf_baseline(m, X, 30);
    double top = 30;
    for (Eigen::Index i = 0; i < tmp.mean.size(); ++i) top = std::max(top, 4.0 * tmp.mean[i]);
    M = static_cast<int>(top);
    pred = ctm::predict_pmf_baseline(m, X, M);
  }
  header.push_back("obs");
  header.push_back("mean");
  for (int r = 0; r <= pred.M; ++r) header.push_back("p" + std::to_string(r));
  for (Eigen::Index i = 0; i < pred.pmf.rows(); ++i) {
    std::vector<std::string> row{std::to_string(i), fmt(pred.mean[i], 6)};
    for (int r = 0; r <= pred.M; ++r) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12g", pred.pmf(i, r));
      row.push_back(buf);
    }
    rows.push_back(std::move(row));
  }
  ctm::write_csv(out, header, rows);
  json opts;
  opts["model"] = model_path;
  opts["data"] = data_path;
  write_manifest(out, "predict", opts, 0,
                 {resolve_data_path(model_path), resolve_data_path(data_path)});
  return 0;
}

int run_score(const std::string& model_path, const std::string& data_path,
              const std::string& rule_name, int r_max, const std::string& out) {
  const ctm::AnyModel any = ctm::load_model(resolve_data_path(model_path));
  const ctm::CountDataset data = ctm::load_csv(resolve_data_path(data_path));
  ctm::ScoreRule rule = ctm::ScoreRule::Rps;
  if (rule_name == "brier") rule = ctm::ScoreRule::Brier;
  else if (rule_name == "log") rule = ctm::ScoreRule::Log;
  else if (rule_name != "rps") throw std::runtime_error("unknown rule: " + rule_name);

  ctm::PredictedDistribution pred;
  if (std::holds_alternative<ctm::FittedTransitionModel>(any)) {
    pred = ctm::predict_pmf(std::get<ctm::FittedTransitionModel>(any), data.covariates);
  } else {
    const int M = std::max(static_cast<int>(std::lround(1.2 * ctm::max_observed(data))), r_max);
    pred = ctm::predict_pmf_baseline(std::get<ctm::BaselineFit>(any), data.covariates, M);
  }
  const ctm::ScoreReport report = ctm::score_predictions(data.outcomes, pred, rule, r_max);
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < report.per_observation.size(); ++i)
    rows.push_back({std::to_string(i), fmt(report.per_observation[i], 6)});
  ctm::write_csv(out, {"obs", rule_name}, rows);
  std::printf("mean %s = %s over %lld observations\n", rule_name.c_str(),
              fmt(report.mean, 4).c_str(), static_cast<long long>(report.per_observation.size()));
  json opts;
  opts["model"] = model_path;
  opts["data"] = data_path;
  opts["rule"] = rule_name;
  opts["r_max"] = r_max;
  write_manifest(out, "score", opts, 0,
                 {resolve_data_path(model_path), resolve_data_path(data_path)});
  return 0;
}

int run_cv(const FitOptions& o) {
  const ctm::CountDataset data = load_dataset(o);
  ctm::TransitionSpec spec = transition_spec_from(o, data);
  ctm::ResamplingProtocol protocol;
  protocol.replications = o.cv_reps;
  protocol.fraction = o.fraction;
  protocol.train_size = o.train_size;
  protocol.seed = o.seed;
  protocol.r_max = o.r_max;
  protocol.jobs = o.jobs;
  const auto result = ctm::select_lambda(data, spec, parse_grid(o.grid), protocol);
  std::vector<std::vector<std::string>> rows;
  for (const auto& pt : result.curve) {
    if (pt.dropped)
      std::fprintf(stderr, "warning: lambda %g dropped (all replications failed)\n", pt.lambda);
    rows.push_back({fmt(pt.lambda, 6), pt.dropped ? "NA" : fmt(pt.mean_rps, 6),
                    std::to_string(pt.failures)});
  }
  std::printf("selected lambda = %g\n", result.lambda);
  if (!o.out.empty() && o.out != "model.json") {
    ctm::write_csv(o.out, {"lambda", "mean_rps", "failures"}, rows);
    write_manifest(o.out, "cv", options_json(o, result.lambda), o.seed,
                   {resolve_data_path(o.data)});
  }
  return 0;
}

int run_compare(FitOptions o, const std::string& models_list, int reps) {
  const ctm::CountDataset data = load_dataset(o);
  std::vector<ctm::ModelChoice> models;
  std::stringstream ss(models_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "poisson") models.push_back({item, ctm::BaselineKind::Poisson});
    else if (item == "negbin") models.push_back({item, ctm::BaselineKind::NegBin});
    else if (item == "zip") models.push_back({item, ctm::BaselineKind::Zip});
    else if (item == "hurdle") models.push_back({item, ctm::BaselineKind::Hurdle});
    else if (item == "transition" || item == "transition-zero" ||
             item == "transition-varying" || item == "transition-quad") {
      FitOptions fo = o;
      fo.model = item == "transition-quad" ? "transition" : item;
      if (item == "transition-quad") fo.smoother = "quadratic";
      ctm::TransitionSpec spec = transition_spec_from(fo, data);
      spec.lambda = resolve_lambda(fo, data, spec);
      models.push_back({item, spec});
    } else {
      throw std::runtime_error("unknown model in --models: " + item);
    }
  }
  ctm::ResamplingProtocol protocol;
  protocol.replications = reps;
  protocol.fraction = o.fraction;
  protocol.train_size = o.train_size;
  protocol.seed = o.seed;
  protocol.r_max = o.r_max;
  protocol.jobs = o.jobs;
  const ctm::CompareResult result = ctm::compare_models(data, models, protocol);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t m = 0; m < result.labels.size(); ++m)
    for (const auto& r : result.scores[m]) {
      if (r.failed) continue;
      rows.push_back({result.labels[m], std::to_string(r.replication), fmt(r.score, 6),
                      std::to_string(r.seed)});
    }
  ctm::write_csv(o.out, {"model", "replication", "rps", "seed"}, rows);

  json summary;
  for (std::size_t m = 0; m < result.labels.size(); ++m) {
    json jm;
    jm["mean_rps"] = result.mean_score[m];
    jm["failures"] = result.failures[m];
    summary[result.labels[m]] = jm;
    std::printf("%-20s mean RPS %s  (failures %d)\n", result.labels[m].c_str(),
                fmt(result.mean_score[m], 4).c_str(), result.failures[m]);
  }
  std::ofstream(o.out + ".summary.json") << summary.dump(1) << "\n";
  json opts = options_json(o, 0.0);
  opts["models"] = models_list;
  opts["replications"] = reps;
  write_manifest(o.out, "compare", opts, o.seed, {resolve_data_path(o.data)});
  return 0;
}

int run_simulate(const std::string& family, double mu, double nu, int n, int reps,
                 std::uint64_t seed, double lambda, int support_max, const std::string& out) {
  ctm::SimConfig config;
  if (family == "poisson") config.family = ctm::SimFamily::Poisson;
  else if (family == "negbin") config.family = ctm::SimFamily::NegBin;
  else throw std::runtime_error("unknown family: " + family);
  config.mu = mu;
  config.nu = nu;
  config.n = n;
  config.replications = reps;
  config.seed = seed;
  ctm::TransitionSpec spec;
  spec.lambda = lambda;
  const ctm::FlexibilityResult result = ctm::flexibility_study(config, spec, support_max);
  std::vector<std::vector<std::string>> rows;
  for (int r = 0; r <= support_max; ++r) {
    char t[32], a[32], f[32];
    std::snprintf(t, sizeof t, "%.10g", result.true_pmf[r]);
    std::snprintf(a, sizeof a, "%.10g", result.avg_transition_pmf[r]);
    std::snprintf(f, sizeof f, "%.10g", result.avg_family_pmf[r]);
    rows.push_back({std::to_string(r), t, a, f});
  }
  ctm::write_csv(out, {"r", "true", "avg_transition", "avg_family"}, rows);
  std::printf("max gap: transition %s, family %s (excluded %d)\n",
              fmt(result.max_gap_transition, 5).c_str(), fmt(result.max_gap_family, 5).c_str(),
              result.excluded);
  json opts;
  opts["family"] = family;
  opts["mu"] = mu;
  opts["nu"] = nu;
  opts["n"] = n;
  opts["reps"] = reps;
  opts["lambda"] = lambda;
  opts["support_max"] = support_max;
  write_manifest(out, "simulate", opts, seed, {});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiparametric transition models for count data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  FitOptions fo;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model and persist it");
  fit_cmd->add_option("--data", fo.data, "CSV data file")->required();
  fit_cmd->add_option("--schema", fo.schema, "schema sidecar (default: <data>.schema.json)");
  fit_cmd->add_option("--model", fo.model,
                      "poisson | negbin | zip | hurdle | transition | transition-zero | transition-varying");
  fit_cmd->add_option("--outcome", fo.outcome, "outcome column (overrides schema)");
  fit_cmd->add_option("--lambda", fo.lambda, "penalty weight, or 'cv'");
  fit_cmd->add_option("--out", fo.out, "model output file");
  fit_cmd->add_option("--curves", fo.curves, "write theta/beta curves CSV (transition kinds)");
  add_transition_flags(fit_cmd, fo);

  std::string p_model, p_data, p_out = "pmf.csv";
  CLI::App* predict_cmd = app.add_subcommand("predict", "per-observation pmf from a saved model");
  predict_cmd->add_option("--model", p_model, "model file")->required();
  predict_cmd->add_option("--data", p_data, "CSV with covariate columns")->required();
  predict_cmd->add_option("--out", p_out, "output CSV");

  std::string s_model, s_data, s_rule = "rps", s_out = "scores.csv";
  int s_rmax = 30;
  CLI::App* score_cmd = app.add_subcommand("score", "score a saved model on labelled data");
  score_cmd->add_option("--model", s_model, "model file")->required();
  score_cmd->add_option("--data", s_data, "CSV data file")->required();
  score_cmd->add_option("--rule", s_rule, "rps | brier | log");
  score_cmd->add_option("--r-max", s_rmax, "RPS summation cap");
  score_cmd->add_option("--out", s_out, "per-observation scores CSV");

  FitOptions cvo;
  cvo.out = "cv_curve.csv";
  CLI::App* cv_cmd = app.add_subcommand("cv", "select lambda by resampled test RPS");
  cv_cmd->add_option("--data", cvo.data, "CSV data file")->required();
  cv_cmd->add_option("--schema", cvo.schema, "schema sidecar");
  cv_cmd->add_option("--model", cvo.model, "transition | transition-zero | transition-varying");
  cv_cmd->add_option("--outcome", cvo.outcome, "outcome column (overrides schema)");
  cv_cmd->add_option("--out", cvo.out, "lambda curve CSV");
  add_transition_flags(cv_cmd, cvo);

  FitOptions co;
  co.out = "compare_scores.csv";
  co.lambda = "cv";
  std::string compare_models_list = "poisson,negbin,zip,hurdle,transition";
  int compare_reps = 100;
  CLI::App* compare_cmd = app.add_subcommand("compare", "resampled model comparison by RPS");
  compare_cmd->add_option("--data", co.data, "CSV data file")->required();
  compare_cmd->add_option("--schema", co.schema, "schema sidecar");
  compare_cmd->add_option("--models", compare_models_list, "comma list of model kinds");
  compare_cmd->add_option("--outcome", co.outcome, "outcome column (overrides schema)");
  compare_cmd->add_option("--reps", compare_reps, "replications");
  compare_cmd->add_option("--lambda", co.lambda, "lambda for transition kinds, or 'cv'");
  compare_cmd->add_option("--out", co.out, "score CSV (model, replication, rps, seed)");
  add_transition_flags(compare_cmd, co);

  std::string sim_family = "poisson", sim_out = "sim_pmf.csv";
  double sim_mu = 5.0, sim_nu = 1.0, sim_lambda = 1.0;
  int sim_n = 100, sim_reps = 100, sim_support = 30;
  std::uint64_t sim_seed = 1;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "flexibility study on simulated counts");
  sim_cmd->add_option("--family", sim_family, "poisson | negbin");
  sim_cmd->add_option("--mu", sim_mu, "mean");
  sim_cmd->add_option("--nu", sim_nu, "NegBin dispersion");
  sim_cmd->add_option("--n", sim_n, "sample size");
  sim_cmd->add_option("--reps", sim_reps, "replications");
  sim_cmd->add_option("--seed", sim_seed, "seed");
  sim_cmd->add_option("--lambda", sim_lambda, "transition smoothing");
  sim_cmd->add_option("--support-max", sim_support, "pmf grid top");
  sim_cmd->add_option("--out", sim_out, "pmf CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fo);
    if (predict_cmd->parsed()) return run_predict(p_model, p_data, p_out);
    if (score_cmd->parsed()) return run_score(s_model, s_data, s_rule, s_rmax, s_out);
    if (cv_cmd->parsed()) return run_cv(cvo);
    if (compare_cmd->parsed()) return run_compare(co, compare_models_list, compare_reps);
    if (sim_cmd->parsed())
      return run_simulate(sim_family, sim_mu, sim_nu, sim_n, sim_reps, sim_seed, sim_lambda,
                          sim_support, sim_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
