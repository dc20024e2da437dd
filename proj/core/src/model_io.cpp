#include "polyfilt/model_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace polyfilt {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument("model: " + msg); }

const json& need(const json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) bad(std::string(what) + " must be a number");
  return j.get<double>();
}

Vector to_vector(const json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

Matrix to_matrix(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) bad(std::string(what) + " must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad(std::string(what) + " is ragged");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

json from_vector(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

json from_matrix(const Matrix& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(from_vector(m.row(r).transpose()));
  return j;
}

// Vectors may be given once or per step (an array of arrays).
Schedule<Vector> vector_schedule(const json& j, const char* what) {
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    std::vector<Vector> vs;
    for (const auto& e : j) vs.push_back(to_vector(e, what));
    return Schedule<Vector>::per_step(std::move(vs));
  }
  return Schedule<Vector>::constant(to_vector(j, what));
}

Schedule<Matrix> matrix_schedule(const json& j, const char* what) {
  if (j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
    std::vector<Matrix> ms;
    for (const auto& e : j) ms.push_back(to_matrix(e, what));
    return Schedule<Matrix>::per_step(std::move(ms));
  }
  return Schedule<Matrix>::constant(to_matrix(j, what));
}

template <class T>
json schedule_json(const Schedule<T>& s, json (*conv)(const T&)) {
  if (s.is_constant()) return conv(s.at(1));
  json j = json::array();
  for (const auto& v : s.values()) j.push_back(conv(v));
  return j;
}

MultiIndex to_index(const json& j, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d) bad("multi-index must have " + std::to_string(d) + " entries");
  std::vector<int> e;
  for (const auto& x : j) {
    if (!x.is_number_integer() || x.get<long long>() < 0) bad("multi-index entries must be non-negative integers");
    e.push_back(x.get<int>());
  }
  return MultiIndex(std::move(e));
}

std::pair<IndexBasis, Matrix> read_coefficients(const json& j, bool generator) {
  const json& jd = need(j, "dim");
  const json& jn = need(j, "order");
  if (!jd.is_number_integer() || jd.get<long long>() < 1) bad("dim must be a positive integer");
  if (!jn.is_number_integer() || jn.get<long long>() < 1) bad("order must be a positive integer");
  const int d = jd.get<int>();
  IndexBasis basis = IndexBasis::enumerate(d, jn.get<int>());
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix b = Matrix::Zero(n, n);
  if (!generator) b(0, 0) = 1.0;
  const json& entries = need(j, "coefficients");
  if (!entries.is_array()) bad("coefficients must be an array");
  for (const auto& e : entries) {
    const MultiIndex lam = to_index(need(e, "lambda"), d);
    const MultiIndex mu = to_index(need(e, "mu"), d);
    if (lam.degree() == 0) bad("row 0 is fixed and cannot be set");
    b(static_cast<Eigen::Index>(basis.rank(lam)), static_cast<Eigen::Index>(basis.rank(mu))) +=
        number(need(e, "value"), "value");
  }
  return {std::move(basis), std::move(b)};
}

Vector read_initial_moments(const json& j, const IndexBasis& basis) {
  Vector m0 = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
  m0(0) = 1.0;
  if (!j.contains("initial_moments")) return m0;
  for (const auto& e : j.at("initial_moments")) {
    const MultiIndex lam = to_index(need(e, "lambda"), basis.dim());
    if (lam.degree() == 0) bad("E X(0)^0 is fixed to 1");
    m0(static_cast<Eigen::Index>(basis.rank(lam))) = number(need(e, "value"), "value");
  }
  return m0;
}

HestonConfig read_heston(const json& j) {
  HestonConfig c;
  auto get = [&](const char* k, double dflt) { return j.contains(k) ? number(j.at(k), k) : dflt; };
  HestonParams& p = c.params;
  p.kappa = get("kappa", p.kappa);
  p.m = get("m", p.m);
  p.sigma = get("sigma", p.sigma);
  p.rho = get("rho", p.rho);
  p.mu = get("mu", 0.0);
  c.explicit_mu_v = j.contains("mu_v");
  c.explicit_sigma_v = j.contains("sigma_v");
  p.mu_v = get("mu_v", 0.0);
  p.sigma_v = get("sigma_v", 0.0);
  c.refresh_initial_law();
  c.noise.tau = get("tau", 0.0);
  c.dt = get("dt", c.dt);
  auto get_int = [&](const char* k, long long dflt) {
    if (!j.contains(k)) return dflt;
    if (!j.at(k).is_number_integer()) bad(std::string(k) + " must be an integer");
    return j.at(k).get<long long>();
  };
  c.n_steps = static_cast<int>(get_int("n_steps", c.n_steps));
  c.substeps = static_cast<int>(get_int("substeps", c.substeps));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) bad("seed must be an integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  p.validate();
  c.noise.validate();
  return c;
}

}  // namespace

void HestonConfig::refresh_initial_law() {
  if (!explicit_mu_v) params.mu_v = params.m;
  if (!explicit_sigma_v) params.sigma_v = stationary_variance(params.kappa, params.m, params.sigma);
}

ModelDocument parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("top level must be an object");
  const json& jk = need(j, "kind");
  if (!jk.is_string()) bad("kind must be a string");
  const std::string kind = jk.get<std::string>();
  ModelDocument doc;
  try {
    if (kind == "discrete") {
      doc.kind = ModelKind::Discrete;
      auto [basis, b] = read_coefficients(j, false);
      Vector m0 = read_initial_moments(j, basis);
      doc.discrete = PolySSM(CoefficientMatrix::constant(std::move(basis), std::move(b)), std::move(m0));
    } else if (kind == "continuous") {
      doc.kind = ModelKind::Continuous;
      auto [basis, b] = read_coefficients(j, true);
      Vector m0 = read_initial_moments(j, basis);
      doc.continuous = PolyProcess(GeneratorMatrix::constant(std::move(basis), std::move(b)), std::move(m0));
    } else if (kind == "gaussian") {
      doc.kind = ModelKind::Gaussian;
      LinearGaussianSSM g;
      g.a = vector_schedule(need(j, "a"), "a");
      g.A = matrix_schedule(need(j, "A"), "A");
      g.C = matrix_schedule(need(j, "C"), "C");
      g.mu0 = to_vector(need(j, "mu0"), "mu0");
      g.Sigma0 = to_matrix(need(j, "Sigma0"), "Sigma0");
      g.validate();
      doc.gaussian = std::move(g);
    } else if (kind == "heston" || kind == "heston-noise" || kind == "heston-continuous") {
      doc.kind = kind == "heston" ? ModelKind::Heston
                 : kind == "heston-noise" ? ModelKind::HestonNoise
                                          : ModelKind::HestonContinuous;
      doc.heston = read_heston(j);
    } else {
      bad("unknown kind \"" + kind + "\"");
    }
  } catch (const json::exception& e) {
    bad(e.what());
  }
  return doc;
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::optional<ModelDocument> builtin_model(std::string_view name) {
  if (name != "heston" && name != "heston-noise" && name != "heston-continuous") return std::nullopt;
  return parse_model(std::string(R"({"kind": ")") + std::string(name) + "\"}");
}

std::string gaussian_to_json(const LinearGaussianSSM& model) {
  json j;
  j["kind"] = "gaussian";
  j["a"] = schedule_json<Vector>(model.a, [](const Vector& v) { return from_vector(v); });
  j["A"] = schedule_json<Matrix>(model.A, [](const Matrix& m) { return from_matrix(m); });
  j["C"] = schedule_json<Matrix>(model.C, [](const Matrix& m) { return from_matrix(m); });
  j["mu0"] = from_vector(model.mu0);
  j["Sigma0"] = from_matrix(model.Sigma0);
  return j.dump(2) + "\n";
}

std::string ou_to_json(const GaussianOU& model) {
  json j;
  j["kind"] = "ou";
  const auto& times = model.C.times();
  j["times"] = times;
  json a = json::array(), A = json::array(), C = json::array();
  for (double t : times) {
    a.push_back(from_vector(model.a.at(t)));
    A.push_back(from_matrix(model.A.at(t)));
    C.push_back(from_matrix(model.C.at(t)));
  }
  j["a"] = std::move(a);
  j["A"] = std::move(A);
  j["C"] = std::move(C);
  j["mu0"] = from_vector(model.mu0);
  j["Sigma0"] = from_matrix(model.Sigma0);
  return j.dump(2) + "\n";
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::invalid_argument("csv: missing column \"" + std::string(name) + "\"");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    out.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("csv: empty input");
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw std::invalid_argument("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(t.header.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0.0;
      const auto r = std::from_chars(c.data(), c.data() + c.size(), v);
      if (r.ec != std::errc() || r.ptr != c.data() + c.size())
        throw std::invalid_argument("csv: line " + std::to_string(lineno) + ": bad number \"" + c + "\"");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return read_csv(in);
}

}  // namespace polyfilt
