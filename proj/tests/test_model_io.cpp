#include "support.hpp"

#include <polyfilt/model_io.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace polyfilt;
using namespace polyfilt::test;

TEST(ModelIo, ParsesDiscreteAr1) {
  // X(t) = 0.5 X(t-1) + eps, E eps^2 = 0.2; order 2.
  const char* text = R"({
    "kind": "discrete", "dim": 1, "order": 2,
    "coefficients": [
      {"lambda": [1], "mu": [1], "value": 0.5},
      {"lambda": [2], "mu": [0], "value": 0.2},
      {"lambda": [2], "mu": [2], "value": 0.25}
    ],
    "initial_moments": [{"lambda": [1], "value": 1.0}, {"lambda": [2], "value": 1.5}]
  })";
  const ModelDocument doc = parse_model(text);
  ASSERT_EQ(doc.kind, ModelKind::Discrete);
  ASSERT_TRUE(doc.discrete.has_value());
  const Matrix& b = doc.discrete->coefficients().at(1);
  EXPECT_EQ(b(0, 0), 1.0);
  EXPECT_EQ(b(1, 1), 0.5);
  EXPECT_EQ(b(2, 0), 0.2);
  EXPECT_EQ(doc.discrete->initial_moments()(0), 1.0);
  EXPECT_EQ(doc.discrete->initial_moments()(2), 1.5);
}

TEST(ModelIo, ParsesGaussianWithPerStepCovariance) {
  const char* text = R"({
    "kind": "gaussian", "a": [0.0], "A": [[0.9]], "C": [[[0.1]], [[0.2]], [[0.3]]],
    "mu0": [0.0], "Sigma0": [[1.0]]
  })";
  const ModelDocument doc = parse_model(text);
  ASSERT_TRUE(doc.gaussian.has_value());
  EXPECT_EQ(doc.gaussian->C.horizon(), 3);
  EXPECT_EQ(doc.gaussian->C.at(2)(0, 0), 0.2);
  EXPECT_TRUE(doc.gaussian->A.is_constant());
}

TEST(ModelIo, GaussianJsonRoundTrip) {
  std::mt19937_64 rng(4);
  LinearGaussianSSM m;
  m.a = Schedule<Vector>::constant(random_vector(rng, 2));
  m.A = Schedule<Matrix>::per_step({random_matrix(rng, 2, 2), random_matrix(rng, 2, 2)});
  m.C = Schedule<Matrix>::constant(random_psd(rng, 2));
  m.mu0 = random_vector(rng, 2);
  m.Sigma0 = random_psd(rng, 2);
  const ModelDocument doc = parse_model(gaussian_to_json(m));
  ASSERT_TRUE(doc.gaussian.has_value());
  EXPECT_EQ(doc.gaussian->A.at(2), m.A.at(2));
  EXPECT_EQ(doc.gaussian->C.at(1), m.C.at(1));
  EXPECT_EQ(doc.gaussian->mu0, m.mu0);
  EXPECT_EQ(doc.gaussian->Sigma0, m.Sigma0);
}

TEST(ModelIo, HestonDefaultsToStationaryInitialLaw) {
  const ModelDocument doc = parse_model(R"({"kind": "heston", "kappa": 2.0, "m": 0.1, "sigma": 0.2, "rho": 0.0})");
  ASSERT_TRUE(doc.heston.has_value());
  const HestonParams& p = doc.heston->params;
  EXPECT_EQ(p.mu_v, 0.1);
  EXPECT_NEAR(p.sigma_v, stationary_variance(2.0, 0.1, 0.2), 1e-16);
  const ModelDocument ex = parse_model(R"({"kind": "heston-noise", "mu_v": 0.3, "tau": 0.01})");
  EXPECT_EQ(ex.kind, ModelKind::HestonNoise);
  EXPECT_EQ(ex.heston->params.mu_v, 0.3);
  EXPECT_EQ(ex.heston->noise.tau, 0.01);
  EXPECT_TRUE(builtin_model("heston-continuous").has_value());
  EXPECT_FALSE(builtin_model("nonsense").has_value());
}

TEST(ModelIo, RejectsMalformedModels) {
  EXPECT_THROW(parse_model("{"), std::invalid_argument);
  EXPECT_THROW(parse_model("[]"), std::invalid_argument);
  EXPECT_THROW(parse_model(R"({"kind": "spline"})"), std::invalid_argument);
  EXPECT_THROW(parse_model(R"({"kind": "gaussian", "a": [0.0]})"), std::invalid_argument);
  EXPECT_THROW(parse_model(R"({"kind": "gaussian", "a": [0], "A": [[1, 2], [3]], "C": [[1]], "mu0": [0],
                               "Sigma0": [[1]]})"),
               std::invalid_argument);
  // Coefficient raising the degree.
  EXPECT_THROW(parse_model(R"({"kind": "discrete", "dim": 1, "order": 2,
                               "coefficients": [{"lambda": [1], "mu": [2], "value": 1.0}]})"),
               std::invalid_argument);
  EXPECT_THROW(load_model("/nonexistent/model.json"), std::invalid_argument);
}

TEST(ModelIo, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, i % 40 - 20);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(ModelIo, CsvRoundTrip) {
  std::ostringstream os;
  write_csv(os, {"t", "x"}, {{0.0, 0.1}, {1.0, -2.5e-17}});
  std::istringstream is(os.str());
  const CsvTable tab = read_csv(is);
  ASSERT_EQ(tab.header.size(), 2u);
  EXPECT_EQ(tab.column("x"), 1u);
  EXPECT_TRUE(tab.has_column("t"));
  EXPECT_FALSE(tab.has_column("y"));
  EXPECT_THROW(tab.column("y"), std::invalid_argument);
  ASSERT_EQ(tab.rows.size(), 2u);
  EXPECT_EQ(tab.rows[1][1], -2.5e-17);
  std::istringstream ragged("a,b\n1,2\n3\n");
  EXPECT_THROW(read_csv(ragged), std::invalid_argument);
  std::istringstream text("a\nfoo\n");
  EXPECT_THROW(read_csv(text), std::invalid_argument);
}
