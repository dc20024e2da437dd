#pragma once

#include "polyfilt/heston.hpp"
#include "polyfilt/polyproc.hpp"
#include "polyfilt/polyssm.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polyfilt {

enum class ModelKind { Discrete, Continuous, Gaussian, Heston, HestonNoise, HestonContinuous };

struct HestonConfig {
  HestonParams params = HestonParams::stationary(1.0, 0.16, 0.3, -0.5);
  NoiseParams noise;
  double dt = 1.0;
  int n_steps = 2000;
  int substeps = 20;
  std::uint64_t seed = 0;
  // When false, mu_v / sigma_v follow the stationary law of the parameters.
  bool explicit_mu_v = false;
  bool explicit_sigma_v = false;

  // Re-derive defaulted initial moments after parameter changes.
  void refresh_initial_law();
};

struct ModelDocument {
  ModelKind kind = ModelKind::Discrete;
  std::optional<PolySSM> discrete;
  std::optional<PolyProcess> continuous;
  std::optional<LinearGaussianSSM> gaussian;
  std::optional<HestonConfig> heston;
};

// JSON model. Polynomial kinds list nonzero coefficients as
//   {"kind": "discrete" | "continuous", "dim": d, "order": n,
//    "coefficients": [{"lambda": [...], "mu": [...], "value": x}, ...],
//    "initial_moments": [{"lambda": [...], "value": x}, ...]}
// with b_{0,0} = 1 (discrete) and E X(0)^0 = 1 implied. Gaussian models
// carry "a", "A", "C" (one value, or one per step), "mu0", "Sigma0".
// Heston kinds carry parameters; missing mu_v / sigma_v default to the
// stationary law. Throws std::invalid_argument on malformed input.
ModelDocument parse_model(std::string_view json_text);
ModelDocument load_model(const std::string& path);

// Built-in Heston model by name ("heston", "heston-noise",
// "heston-continuous"), or nullopt.
std::optional<ModelDocument> builtin_model(std::string_view name);

std::string gaussian_to_json(const LinearGaussianSSM& model);
// a, A, C sampled on the interpolation grid of C.
std::string ou_to_json(const GaussianOU& model);

// Shortest decimal that reads back to the same double.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  // Column position by name; throws std::invalid_argument when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);
CsvTable read_csv(std::istream& is);
CsvTable load_csv(const std::string& path);

}  // namespace polyfilt
