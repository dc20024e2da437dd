#include "cli.hpp"

#include <polyfilt/error.hpp>
#include <polyfilt/heston.hpp>
#include <polyfilt/kalman.hpp>
#include <polyfilt/kalmanbucy.hpp>
#include <polyfilt/model_io.hpp>
#include <polyfilt/oracle.hpp>
#include <polyfilt/polyproc.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace polyfilt::cli {

namespace {

struct Options {
  std::string model;
  std::string out;
  std::string data;
  std::string observed;
  std::string suite = "all";
  std::uint64_t seed = 0;
  int t = 0;
  double dt = 0.0;
  double kappa = 0, m = 0, sigma = 0, rho = 0, mu = 0, mu_v = 0, sigma_v = 0, tau = 0;
  int n_steps = 0, substeps = 0;
  // Flags actually given on the command line.
  std::map<std::string, std::vector<CLI::Option*>> given;
  bool has(const std::string& name) const {
    const auto it = given.find(name);
    if (it == given.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [](const CLI::Option* op) { return op->count() > 0; });
  }
};

// Destination for one output file: --out directory or the caller's stream.
class Sink {
 public:
  Sink(const Options& o, std::ostream& fallback) : dir_(o.out), fallback_(fallback) {}
  template <class F>
  void write(const std::string& file, F&& body) {
    if (dir_.empty()) {
      body(fallback_);
      return;
    }
    std::filesystem::create_directories(dir_);
    const auto path = std::filesystem::path(dir_) / file;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot write " + path.string());
    body(os);
    spdlog::info("wrote {}", path.string());
  }

 private:
  std::string dir_;
  std::ostream& fallback_;
};

IndexList parse_indices(const std::string& s) {
  IndexList out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("--observed: bad index \"" + tok + "\"");
    }
    if (pos != tok.size()) throw std::invalid_argument("--observed: bad index \"" + tok + "\"");
    out.push_back(v);
  }
  return out;
}

bool is_continuous(ModelKind k) { return k == ModelKind::Continuous || k == ModelKind::HestonContinuous; }

ModelDocument resolve_model(const Options& o) {
  if (o.model.empty()) throw std::invalid_argument("--model is required");
  ModelDocument doc;
  if (auto b = builtin_model(o.model))
    doc = std::move(*b);
  else
    doc = load_model(o.model);
  if (doc.heston) {
    HestonConfig& c = *doc.heston;
    HestonParams& p = c.params;
    if (o.has("kappa")) p.kappa = o.kappa;
    if (o.has("m")) p.m = o.m;
    if (o.has("sigma")) p.sigma = o.sigma;
    if (o.has("rho")) p.rho = o.rho;
    if (o.has("mu")) p.mu = o.mu;
    if (o.has("mu-v")) {
      p.mu_v = o.mu_v;
      c.explicit_mu_v = true;
    }
    if (o.has("sigma-v")) {
      p.sigma_v = o.sigma_v;
      c.explicit_sigma_v = true;
    }
    if (o.has("tau")) c.noise.tau = o.tau;
    if (o.has("dt")) c.dt = o.dt;
    if (o.has("n-steps")) c.n_steps = o.n_steps;
    if (o.has("substeps")) c.substeps = o.substeps;
    if (o.has("seed")) c.seed = o.seed;
    c.refresh_initial_law();
    p.validate();
    c.noise.validate();
  }
  return doc;
}

double step_size(const Options& o, const ModelDocument& doc) {
  if (o.has("dt")) return o.dt;
  return doc.heston ? doc.heston->dt : 1.0;
}

// Polynomial model behind a discrete document (none for Gaussian input).
std::optional<PolySSM> polynomial_model(const ModelDocument& doc) {
  switch (doc.kind) {
    case ModelKind::Discrete:
      return doc.discrete;
    case ModelKind::Heston:
      return heston_returns_model(doc.heston->params, 2, doc.heston->dt);
    case ModelKind::HestonNoise:
      return microstructure_model(doc.heston->params, doc.heston->noise, 2, doc.heston->dt);
    default:
      return std::nullopt;
  }
}

LinearGaussianSSM discrete_model(const ModelDocument& doc, int horizon) {
  if (doc.kind == ModelKind::Gaussian) return *doc.gaussian;
  if (doc.kind == ModelKind::Heston && doc.heston->dt == 1.0 && doc.heston->params.mu == 0.0)
    return heston_gaussian_equivalent(doc.heston->params, horizon);
  const auto poly = polynomial_model(doc);
  if (!poly) throw std::invalid_argument("model is not a discrete-time model");
  return gaussian_equivalent(*poly, horizon);
}

HestonPath simulate(const HestonConfig& c, int n_steps) {
  SimulationConfig cfg;
  cfg.dt = c.dt;
  cfg.n_steps = n_steps;
  cfg.substeps = c.substeps;
  cfg.seed = c.seed;
  return simulate_heston(c.params, c.noise, cfg);
}

// State vectors of a Heston model read off a simulated path.
std::vector<Vector> heston_states(ModelKind kind, const HestonPath& p) {
  std::vector<Vector> xs;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    Vector x;
    if (kind == ModelKind::Heston) {
      x.resize(3);
      x << p.v[i], p.dY[i], p.dY2[i];
    } else if (kind == ModelKind::HestonNoise) {
      x.resize(kMicroDim);
      x << p.v[i], p.Y[i], p.Y[i] * p.Y[i], p.Ytilde[i], p.Ytilde[i] * p.Ytilde[i], p.dYtilde2[i],
          p.Y[i] * p.Ytilde[i];
    } else {
      x.resize(3);
      x << p.v[i], p.Y[i], p.Y[i] * p.Y[i];
    }
    xs.push_back(std::move(x));
  }
  return xs;
}

HestonPath path_from_csv(const CsvTable& t) {
  HestonPath p;
  const std::pair<const char*, std::vector<double>*> cols[] = {{"t", &p.t},   {"v", &p.v},           {"Y", &p.Y},
                                                                 {"dY", &p.dY}, {"dY2", &p.dY2},       {"Ytilde", &p.Ytilde},
                                                                 {"dYtilde2", &p.dYtilde2}};
  for (const auto& [name, dst] : cols) {
    const std::size_t c = t.column(name);
    for (const auto& row : t.rows) dst->push_back(row[c]);
  }
  return p;
}

ObservationPartition default_partition(const Options& o, const ModelDocument& doc, int dim) {
  if (!o.observed.empty()) return ObservationPartition(parse_indices(o.observed), dim);
  switch (doc.kind) {
    case ModelKind::Heston:
      return ObservationPartition({1, 2}, dim);
    case ModelKind::HestonNoise:
      return ObservationPartition({kYt, kYt2, kDYt2}, dim);
    case ModelKind::HestonContinuous:
      return ObservationPartition({1}, dim);
    default:
      throw std::invalid_argument("--observed is required for this model");
  }
}

// Observation times and values X_o(t). Heston models read simulated-path
// CSVs (or simulate when --data is absent); other models read a CSV with a
// time column followed by one column per observed coordinate.
struct Observations {
  std::vector<double> times;
  std::vector<Vector> values;
};

// Without --data a Heston path is simulated; its length is --t unless --t
// means something else (predict), then --n-steps.
Observations load_observations(const Options& o, const ModelDocument& doc, const ObservationPartition& part,
                               bool t_is_length) {
  Observations obs;
  if (doc.heston) {
    HestonPath path;
    if (o.data.empty()) {
      path = simulate(*doc.heston, t_is_length && o.has("t") ? o.t : doc.heston->n_steps);
    } else {
      path = path_from_csv(load_csv(o.data));
    }
    for (const auto& x : heston_states(doc.kind, path)) obs.values.push_back(take(x, part.observed()));
    obs.times = path.t;
    return obs;
  }
  if (o.data.empty()) throw std::invalid_argument("--data is required for this model");
  const CsvTable t = load_csv(o.data);
  if (t.header.size() != static_cast<std::size_t>(part.observed_count()) + 1)
    throw std::invalid_argument("--data: expected a time column and " + std::to_string(part.observed_count()) +
                                " observed columns");
  for (const auto& row : t.rows) {
    obs.times.push_back(row[0]);
    Vector v(part.observed_count());
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = row[static_cast<std::size_t>(j) + 1];
    obs.values.push_back(v);
  }
  if (obs.values.empty()) throw std::invalid_argument("--data: no rows");
  return obs;
}

std::vector<std::string> state_header(int d, bool with_s) {
  std::vector<std::string> h{"t"};
  if (with_s) h.push_back("s");
  for (int i = 0; i < d; ++i) h.push_back("mean" + std::to_string(i));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) h.push_back("cov" + std::to_string(i) + "_" + std::to_string(j));
  return h;
}

std::vector<double> state_row(double t, std::optional<double> s, const Vector& mean, const Matrix& cov) {
  std::vector<double> r{t};
  if (s) r.push_back(*s);
  for (Eigen::Index i = 0; i < mean.size(); ++i) r.push_back(mean(i));
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    for (Eigen::Index j = i; j < cov.cols(); ++j) r.push_back(cov(i, j));
  return r;
}

GaussianOU continuous_model(const ModelDocument& doc, std::span<const double> grid) {
  if (doc.kind == ModelKind::HestonContinuous) return gaussian_equivalent_continuous(heston_process(doc.heston->params), grid);
  if (doc.kind == ModelKind::Continuous) return gaussian_equivalent_continuous(*doc.continuous, grid);
  throw std::invalid_argument("model is not a continuous-time model");
}

KalmanBucyOptions kb_options(bool gamma) {
  KalmanBucyOptions k;
  k.with_gamma = gamma;
  return k;
}

int cmd_simulate(const Options& o, Sink& sink) {
  const ModelDocument doc = resolve_model(o);
  if (!doc.heston) throw std::invalid_argument("simulate needs a Heston model");
  const HestonPath p = simulate(*doc.heston, o.has("t") ? o.t : doc.heston->n_steps);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < p.t.size(); ++i)
    rows.push_back({p.t[i], p.v[i], p.Y[i], p.dY[i], p.dY2[i], p.Ytilde[i], p.dYtilde2[i]});
  sink.write("path.csv", [&](std::ostream& os) { write_csv(os, {"t", "v", "Y", "dY", "dY2", "Ytilde", "dYtilde2"}, rows); });
  return 0;
}

int cmd_moments(const Options& o, Sink& sink) {
  const ModelDocument doc = resolve_model(o);
  const int T = o.has("t") ? o.t : 10;
  if (T < 0) throw std::invalid_argument("--t must be non-negative");
  std::vector<std::vector<double>> rows;
  int d = 0;
  auto emit = [&](double t, const Vector& mean, const Matrix& second) {
    d = static_cast<int>(mean.size());
    rows.push_back(state_row(t, std::nullopt, mean, second));
  };
  if (is_continuous(doc.kind)) {
    const double dt = step_size(o, doc);
    const auto grid = uniform_grid(T * dt, dt);
    const PolyProcess proc = doc.kind == ModelKind::HestonContinuous ? heston_process(doc.heston->params) : *doc.continuous;
    const auto traj = moment_ode(proc, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) emit(grid[i], traj.mean[i], traj.second[i]);
  } else if (const auto poly = polynomial_model(doc)) {
    const auto path = moment_path(*poly, T);
    for (int t = 0; t <= T; ++t) {
      const MomentPoint mp = state_moments(poly->coefficients().basis(), path[static_cast<std::size_t>(t)]);
      emit(t, mp.mean, mp.second);
    }
  } else {
    const auto pts = second_moments(*doc.gaussian, T);
    for (int t = 0; t <= T; ++t) emit(t, pts[static_cast<std::size_t>(t)].mean, pts[static_cast<std::size_t>(t)].second);
  }
  std::vector<std::string> header{"t"};
  for (int i = 0; i < d; ++i) header.push_back("mean" + std::to_string(i));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) header.push_back("P" + std::to_string(i) + "_" + std::to_string(j));
  sink.write("moments.csv", [&](std::ostream& os) { write_csv(os, header, rows); });
  return 0;
}

int cmd_gaussian_equivalent(const Options& o, Sink& sink) {
  const ModelDocument doc = resolve_model(o);
  const int T = o.has("t") ? o.t : 10;
  if (is_continuous(doc.kind)) {
    const double dt = step_size(o, doc);
    const auto grid = uniform_grid(T * dt, dt);
    const GaussianOU ou = continuous_model(doc, grid);
    sink.write("gaussian.json", [&](std::ostream& os) { os << ou_to_json(ou); });
  } else {
    if (T < 1) throw std::invalid_argument("--t must be >= 1");
    const LinearGaussianSSM g = discrete_model(doc, T);
    sink.write("gaussian.json", [&](std::ostream& os) { os << gaussian_to_json(g); });
  }
  return 0;
}

enum class Estimate { Filter, Predict, Smooth };

int cmd_estimate(const Options& o, Sink& sink, Estimate what) {
  const ModelDocument doc = resolve_model(o);
  const char* file = what == Estimate::Filter ? "filter.csv" : what == Estimate::Predict ? "predict.csv" : "smooth.csv";
  std::vector<std::vector<double>> rows;
  int d = 0;
  if (is_continuous(doc.kind)) {
    const int dim = doc.kind == ModelKind::HestonContinuous ? 3 : doc.continuous->dim();
    const ObservationPartition part = default_partition(o, doc, dim);
    const Observations obs = load_observations(o, doc, part, what != Estimate::Predict);
    std::vector<double> grid = obs.times;
    const int ahead = what == Estimate::Predict ? (o.has("t") ? o.t : 1) : 0;
    if (ahead < 0) throw std::invalid_argument("--t must be positive");
    const double dt = o.has("dt") ? o.dt : (grid.size() > 1 ? grid[grid.size() - 1] - grid[grid.size() - 2] : 1.0);
    std::vector<double> model_grid = grid;
    for (int k = 1; k <= ahead; ++k) model_grid.push_back(grid.back() + k * dt);
    const GaussianOU ou = continuous_model(doc, model_grid);
    d = ou.dim();
    const ObservationPath path{obs.times, obs.values};
    const auto out = kb_filter(ou, part, path, kb_options(what == Estimate::Smooth));
    if (what == Estimate::Filter) {
      for (std::size_t i = 0; i < out.times.size(); ++i)
        rows.push_back(state_row(out.times[i], out.times[i], out.mean[i], out.riccati.Sigma[i]));
    } else if (what == Estimate::Predict) {
      const std::vector<double> times(model_grid.begin() + static_cast<std::ptrdiff_t>(grid.size()) - 1,
                                      model_grid.end());
      const auto pr = kb_predict(ou, out.mean.back(), out.riccati.Sigma.back(), times);
      for (std::size_t i = 1; i < pr.times.size(); ++i)
        rows.push_back(state_row(pr.times[i], times.front(), pr.mean[i], pr.cov[i]));
    } else {
      for (const auto& e : kb_smooth_all(ou, part, path, out, out.times.size() - 1))
        rows.push_back(state_row(e.t, e.s, e.mean, e.cov));
    }
  } else {
    const int dim = doc.kind == ModelKind::Gaussian ? doc.gaussian->dim()
                    : doc.kind == ModelKind::Discrete ? doc.discrete->dim()
                    : doc.kind == ModelKind::Heston   ? 3
                                                      : kMicroDim;
    const ObservationPartition part = default_partition(o, doc, dim);
    const Observations obs = load_observations(o, doc, part, what != Estimate::Predict);
    const int T = static_cast<int>(obs.values.size()) - 1;
    const int ahead = what == Estimate::Predict ? (o.has("t") ? o.t : 1) : 0;
    if (ahead < 0) throw std::invalid_argument("--t must be positive");
    const LinearGaussianSSM model = discrete_model(doc, std::max(1, T + ahead));
    d = model.dim();
    const FilterRun run = filter(model, part, obs.values);
    if (what == Estimate::Filter) {
      for (const auto& f : run.filtered) rows.push_back(state_row(f.t, f.s, f.mean, f.cov));
    } else if (what == Estimate::Predict) {
      for (int k = 1; k <= ahead; ++k) {
        const FilterState p = predict(model, run.filtered.back(), T + k);
        rows.push_back(state_row(p.t, p.s, p.mean, p.cov));
      }
    } else {
      for (const auto& f : smooth(model, run, T)) rows.push_back(state_row(f.t, f.s, f.mean, f.cov));
    }
  }
  sink.write(file, [&](std::ostream& os) { write_csv(os, state_header(d, true), rows); });
  return 0;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const auto results = run_suite(o.suite);
  bool ok = true;
  for (const auto& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << " max_error=" << format_double(r.value)
        << " tolerance=" << format_double(r.tolerance) << '\n';
    ok = ok && r.pass;
  }
  if (!ok) throw NumericalError("verification suite " + o.suite + " failed");
  return 0;
}

// One seeded Heston path observed at spacing dt; v is filtered from
// (dY, dY^2) and from dY alone.
int cmd_figure1(const Options& o, Sink& sink) {
  Options oo = o;
  oo.model = "heston";
  auto doc = resolve_model(oo);
  HestonConfig c = *doc.heston;
  if (!o.has("dt")) c.dt = 1.0 / 250.0;
  if (!o.has("seed")) c.seed = 42;
  if (!o.has("n-steps")) c.n_steps = 2000;
  doc.heston = c;
  const HestonPath path = simulate(c, c.n_steps);
  const auto states = heston_states(ModelKind::Heston, path);
  const LinearGaussianSSM model = discrete_model(doc, c.n_steps);
  auto run_with = [&](const ObservationPartition& part) {
    std::vector<Vector> obs;
    for (const auto& x : states) obs.push_back(take(x, part.observed()));
    return filter(model, part, obs);
  };
  const FilterRun both = run_with(ObservationPartition({1, 2}, 3));
  const FilterRun dy = run_with(ObservationPartition({1}, 3));
  std::vector<std::vector<double>> rows;
  for (int t = 1; t <= c.n_steps; ++t) {
    const auto i = static_cast<std::size_t>(t);
    rows.push_back({static_cast<double>(t), path.v[i], both.filtered[i].mean(0), dy.filtered[i].mean(0),
                    both.filtered[i].cov(0, 0), dy.filtered[i].cov(0, 0)});
  }
  sink.write("figure1.csv",
             [&](std::ostream& os) { write_csv(os, {"t", "v", "vhat1", "vhat2", "var1", "var2"}, rows); });
  return 0;
}

void configure_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("polyfilt", sink);
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("POLYFILT_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug")
    logger->set_level(spdlog::level::debug);
  else if (level == "info")
    logger->set_level(spdlog::level::info);
  else
    logger->set_level(spdlog::level::err);
  spdlog::set_default_logger(logger);
}

void add_common(CLI::App* sub, Options& o, bool model = true) {
  if (model) o.given["model"].push_back(sub->add_option("--model", o.model, "Model JSON file or built-in name"));
  o.given["out"].push_back(sub->add_option("--out", o.out, "Output directory (default: standard output)"));
  o.given["seed"].push_back(sub->add_option("--seed", o.seed, "Random seed"));
  o.given["t"].push_back(sub->add_option("--t", o.t, "Horizon or steps ahead"));
  o.given["dt"].push_back(sub->add_option("--dt", o.dt, "Time step")->check(CLI::PositiveNumber));
  o.given["observed"].push_back(sub->add_option("--observed", o.observed, "Observed coordinates, e.g. 1,2"));
  o.given["data"].push_back(sub->add_option("--data", o.data, "Observation CSV"));
  o.given["kappa"].push_back(sub->add_option("--kappa", o.kappa));
  o.given["m"].push_back(sub->add_option("--m", o.m));
  o.given["sigma"].push_back(sub->add_option("--sigma", o.sigma));
  o.given["rho"].push_back(sub->add_option("--rho", o.rho));
  o.given["mu"].push_back(sub->add_option("--mu", o.mu));
  o.given["mu-v"].push_back(sub->add_option("--mu-v", o.mu_v));
  o.given["sigma-v"].push_back(sub->add_option("--sigma-v", o.sigma_v));
  o.given["tau"].push_back(sub->add_option("--tau", o.tau));
  o.given["n-steps"].push_back(sub->add_option("--n-steps", o.n_steps));
  o.given["substeps"].push_back(sub->add_option("--substeps", o.substeps));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_logging(err);
  CLI::App app{"Optimal linear filtering of polynomial state space models", "polyfilt"};
  app.require_subcommand(1);
  Options o;
  auto* sim = app.add_subcommand("simulate", "Simulate a Heston path");
  auto* mom = app.add_subcommand("moments", "First and second moments");
  auto* fil = app.add_subcommand("filter", "Optimal linear filter");
  auto* pre = app.add_subcommand("predict", "Optimal linear predictor");
  auto* smo = app.add_subcommand("smooth", "Optimal linear smoother");
  auto* geq = app.add_subcommand("gaussian-equivalent", "Gaussian equivalent as JSON");
  auto* ver = app.add_subcommand("verify", "Run an oracle-equivalence suite");
  auto* fig = app.add_subcommand("figure1", "Filtered Heston variance on one simulated path");
  for (auto* s : {sim, mom, fil, pre, smo, geq}) add_common(s, o);
  add_common(fig, o, false);
  ver->add_option("--suite", o.suite, "kalman-oracle, pipeline, riccati or all");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp& e) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      throw std::invalid_argument(e.what());
    }
    Sink sink(o, out);
    if (*sim) return cmd_simulate(o, sink);
    if (*mom) return cmd_moments(o, sink);
    if (*fil) return cmd_estimate(o, sink, Estimate::Filter);
    if (*pre) return cmd_estimate(o, sink, Estimate::Predict);
    if (*smo) return cmd_estimate(o, sink, Estimate::Smooth);
    if (*geq) return cmd_gaussian_equivalent(o, sink);
    if (*ver) return cmd_verify(o, out);
    if (*fig) return cmd_figure1(o, sink);
    throw std::invalid_argument("no command");
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\nerror_code=numerical\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\nerror_code=config\n";
    return 1;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\nerror_code=config\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\nerror_code=io\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\nerror_code=internal\n";
    return 2;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"polyfilt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace polyfilt::cli
