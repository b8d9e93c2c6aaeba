#include "ctm/persist.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace ctm {

namespace {

using nlohmann::json;

std::string hexd(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double unhexd(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

json vec_to_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(hexd(v[i]));
  return a;
}

VectorXd vec_from_json(const json& a) {
  VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = unhexd(a[i]);
  return v;
}

json mat_to_json(const MatrixXd& m) {
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(hexd(m(i, j)));
  out["data"] = a;
  return out;
}

MatrixXd mat_from_json(const json& jm) {
  MatrixXd m(jm.at("rows").get<Eigen::Index>(), jm.at("cols").get<Eigen::Index>());
  const json& a = jm.at("data");
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = unhexd(a[k++]);
  return m;
}

json encoder_to_json(const std::vector<EncodedColumn>& enc) {
  json a = json::array();
  for (const auto& e : enc) {
    json je;
    je["name"] = e.name;
    je["kind"] = e.kind == ColumnKind::Numeric ? "numeric" : "categorical";
    je["reference"] = e.reference;
    je["levels"] = e.levels;
    a.push_back(je);
  }
  return a;
}

std::vector<EncodedColumn> encoder_from_json(const json& a) {
  std::vector<EncodedColumn> out;
  for (const auto& je : a) {
    EncodedColumn e;
    e.name = je.at("name").get<std::string>();
    e.kind = je.at("kind").get<std::string>() == "numeric" ? ColumnKind::Numeric
                                                           : ColumnKind::Categorical;
    e.reference = je.at("reference").get<std::string>();
    e.levels = je.at("levels").get<std::vector<std::string>>();
    out.push_back(std::move(e));
  }
  return out;
}

const char* kind_name(BaselineKind k) {
  switch (k) {
    case BaselineKind::Poisson: return "poisson";
    case BaselineKind::NegBin: return "negbin";
    case BaselineKind::Zip: return "zip";
    case BaselineKind::Hurdle: return "hurdle";
  }
  return "?";
}

void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump(1) << "\n";
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  in >> j;
  if (j.value("schema", "") != std::string("ctm.model.v1"))
    throw std::runtime_error("unrecognised model schema in " + path);
  return j;
}

}  // namespace

void save_model(const std::string& path, const FittedTransitionModel& model) {
  json j;
  j["schema"] = "ctm.model.v1";
  j["kind"] = "transition";
  const TransitionSpec& s = model.spec;
  json js;
  js["link"] = s.link == Link::Logit ? "logit" : "cloglog";
  js["smoother"] = s.smoother == Smoother::PSplines ? "psplines" : "theta-quadratic";
  js["variant"] = s.variant == Variant::Basic ? "basic"
                  : s.variant == Variant::ZeroSplit ? "zero-split" : "varying";
  js["lambda"] = hexd(s.lambda);
  js["M"] = s.M;
  js["num_basis"] = s.num_basis;
  js["degree"] = s.degree;
  js["diff_order"] = s.diff_order;
  js["varying_flags"] = s.varying_flags;
  {
    json lt = json::array();
    for (double v : s.lambda_terms) lt.push_back(hexd(v));
    js["lambda_terms"] = lt;
  }
  js["max_iter"] = s.max_iter;
  js["tol"] = hexd(s.tol);
  js["grad_tol"] = hexd(s.grad_tol);
  js["sandwich_se"] = s.sandwich_se;
  j["spec"] = js;
  j["alpha"] = vec_to_json(model.alpha);
  j["covariance"] = mat_to_json(model.covariance);
  if (model.covariance_sandwich.size() > 0)
    j["covariance_sandwich"] = mat_to_json(model.covariance_sandwich);
  j["theta"] = vec_to_json(model.theta);
  j["beta"] = vec_to_json(model.beta);
  j["beta_zero"] = vec_to_json(model.beta_zero);
  j["beta_curves"] = mat_to_json(model.beta_curves);
  j["coef_names"] = model.coef_names;
  j["separated"] = model.separated;
  j["covariate_names"] = model.covariate_names;
  j["encoder"] = encoder_to_json(model.encoder);
  j["lambda_used"] = hexd(model.lambda_used);
  j["q"] = model.q;
  j["p"] = model.p;
  json jd;
  jd["converged"] = model.diag.converged;
  jd["iterations"] = model.diag.iterations;
  jd["loglik"] = hexd(model.diag.loglik);
  jd["penalized_loglik"] = hexd(model.diag.penalized_loglik);
  jd["grad_norm"] = hexd(model.diag.grad_norm);
  jd["degenerate_zero_part"] = model.diag.degenerate_zero_part;
  j["diag"] = jd;
  write_file(path, j);
}

void save_model(const std::string& path, const BaselineFit& model) {
  json j;
  j["schema"] = "ctm.model.v1";
  j["kind"] = kind_name(model.kind);
  j["beta"] = vec_to_json(model.beta);
  j["gamma"] = vec_to_json(model.gamma);
  j["nu"] = hexd(model.nu);
  j["covariance"] = mat_to_json(model.covariance);
  j["covariance_gamma"] = mat_to_json(model.covariance_gamma);
  j["loglik"] = hexd(model.loglik);
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  j["boundary"] = model.boundary;
  j["poisson_limit"] = model.poisson_limit;
  j["degenerate_zero_part"] = model.degenerate_zero_part;
  j["coef_names"] = model.coef_names;
  j["covariate_names"] = model.covariate_names;
  j["encoder"] = encoder_to_json(model.encoder);
  write_file(path, j);
}

AnyModel load_model(const std::string& path) {
  const json j = read_file(path);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "transition") {
    FittedTransitionModel m;
    const json& js = j.at("spec");
    m.spec.link = js.at("link").get<std::string>() == "logit" ? Link::Logit : Link::Cloglog;
    m.spec.smoother = js.at("smoother").get<std::string>() == "psplines"
                          ? Smoother::PSplines
                          : Smoother::ThetaQuadratic;
    const std::string variant = js.at("variant").get<std::string>();
    m.spec.variant = variant == "basic" ? Variant::Basic
                     : variant == "zero-split" ? Variant::ZeroSplit : Variant::Varying;
    m.spec.lambda = unhexd(js.at("lambda").get<std::string>());
    m.spec.M = js.at("M").get<int>();
    m.spec.num_basis = js.at("num_basis").get<int>();
    m.spec.degree = js.at("degree").get<int>();
    m.spec.diff_order = js.at("diff_order").get<int>();
    m.spec.varying_flags = js.at("varying_flags").get<std::vector<bool>>();
    for (const auto& v : js.at("lambda_terms")) m.spec.lambda_terms.push_back(unhexd(v));
    m.spec.max_iter = js.at("max_iter").get<int>();
    m.spec.tol = unhexd(js.at("tol").get<std::string>());
    m.spec.grad_tol = unhexd(js.at("grad_tol").get<std::string>());
    m.spec.sandwich_se = js.at("sandwich_se").get<bool>();
    m.alpha = vec_from_json(j.at("alpha"));
    m.covariance = mat_from_json(j.at("covariance"));
    if (j.contains("covariance_sandwich"))
      m.covariance_sandwich = mat_from_json(j.at("covariance_sandwich"));
    m.theta = vec_from_json(j.at("theta"));
    m.beta = vec_from_json(j.at("beta"));
    m.beta_zero = vec_from_json(j.at("beta_zero"));
    m.beta_curves = mat_from_json(j.at("beta_curves"));
    m.coef_names = j.at("coef_names").get<std::vector<std::string>>();
    m.separated = j.at("separated").get<std::vector<bool>>();
    m.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
    m.encoder = encoder_from_json(j.at("encoder"));
    m.lambda_used = unhexd(j.at("lambda_used").get<std::string>());
    m.q = j.at("q").get<int>();
    m.p = j.at("p").get<int>();
    const json& jd = j.at("diag");
    m.diag.converged = jd.at("converged").get<bool>();
    m.diag.iterations = jd.at("iterations").get<int>();
    m.diag.loglik = unhexd(jd.at("loglik").get<std::string>());
    m.diag.penalized_loglik = unhexd(jd.at("penalized_loglik").get<std::string>());
    m.diag.grad_norm = unhexd(jd.at("grad_norm").get<std::string>());
    m.diag.degenerate_zero_part = jd.at("degenerate_zero_part").get<bool>();
    return m;
  }
  BaselineFit m;
  if (kind == "poisson") m.kind = BaselineKind::Poisson;
  else if (kind == "negbin") m.kind = BaselineKind::NegBin;
  else if (kind == "zip") m.kind = BaselineKind::Zip;
  else if (kind == "hurdle") m.kind = BaselineKind::Hurdle;
  else throw std::runtime_error("unknown model kind: " + kind);
  m.beta = vec_from_json(j.at("beta"));
  m.gamma = vec_from_json(j.at("gamma"));
  m.nu = unhexd(j.at("nu").get<std::string>());
  m.covariance = mat_from_json(j.at("covariance"));
  m.covariance_gamma = mat_from_json(j.at("covariance_gamma"));
  m.loglik = unhexd(j.at("loglik").get<std::string>());
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<int>();
  m.boundary = j.at("boundary").get<bool>();
  m.poisson_limit = j.at("poisson_limit").get<bool>();
  m.degenerate_zero_part = j.at("degenerate_zero_part").get<bool>();
  m.coef_names = j.at("coef_names").get<std::vector<std::string>>();
  m.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
  m.encoder = encoder_from_json(j.at("encoder"));
  return m;
}

}  // namespace ctm
