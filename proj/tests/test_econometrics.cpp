#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "crashsim/econometrics.hpp"
#include "crashsim/errors.hpp"
#include "support.hpp"

using namespace crashsim;

namespace {

const char* kGoodCsv =
    "id,log_return,beta,smb,hml,leverage_ratio,short_sale_ratio\n"
    "A1,-0.12,1.1,0.02,-0.03,0.45,0.01\n"
    "A2,-0.30,0.9,-0.05,0.10,0.80,0.00\n"
    "A3,-0.05,1.3,0.00,0.00,0.10,0.04\n";

std::vector<double> column(const ObservationTable& t, double Observation::*field) {
  std::vector<double> out;
  for (const Observation& o : t.rows) out.push_back(o.*field);
  return out;
}

}  // namespace

TEST_CASE("observation csv: happy path") {
  const ObservationTable t = load_observations(kGoodCsv);
  REQUIRE(t.size() == 3);
  CHECK(t.rows[0].id == "A1");
  CHECK(t.rows[1].log_return == -0.30);
  CHECK(t.rows[2].leverage_ratio == 0.10);
  CHECK(t.rows[0].short_sale_ratio == 0.01);
}

TEST_CASE("observation csv: header order is free, cells may be padded") {
  const char* shuffled =
      "short_sale_ratio , id,hml,beta,log_return,smb,leverage_ratio\r\n"
      "0.02, X9 ,1e-2,1.25,-4.5e-1,0.0,0.33\r\n"
      "\n"
      "0.00,Y1,-0.01,0.75,-0.02,0.1,0.21\n";
  const ObservationTable t = load_observations(shuffled);
  REQUIRE(t.size() == 2);
  CHECK(t.rows[0].id == "X9");
  CHECK(t.rows[0].log_return == -0.45);
  CHECK(t.rows[0].hml == 0.01);
  CHECK(t.rows[0].short_sale_ratio == 0.02);
  CHECK(t.rows[1].id == "Y1");
}

TEST_CASE("observation csv: schema failures carry kind, column and row") {
  auto kind_of = [](const char* text) {
    try {
      load_observations(text);
    } catch (const CsvError& e) {
      return e.kind;
    }
    throw std::runtime_error("expected CsvError");
  };

  CHECK(kind_of("id,log_return,beta,smb,hml,leverage_ratio\n"
                "A,1,1,1,1,1\n") == CsvError::Kind::MissingColumn);
  CHECK(kind_of("id,log_return,beta,smb,hml,leverage_ratio,short_sale_ratio,extra\n"
                "A,1,1,1,1,1,1,1\n") == CsvError::Kind::UnexpectedColumn);
  CHECK(kind_of("id,log_return,beta,smb,hml,leverage_ratio,short_sale_ratio,beta\n"
                "A,1,1,1,1,1,1,1\n") == CsvError::Kind::UnexpectedColumn);
  CHECK(kind_of("id,log_return,beta,smb,hml,leverage_ratio,short_sale_ratio\n") ==
        CsvError::Kind::EmptyTable);

  try {
    load_observations(
        "id,log_return,beta,smb,hml,leverage_ratio,short_sale_ratio\n"
        "A,-0.1,1.0,0,0,0.5,0.01\n"
        "B,-0.2,oops,0,0,0.4,0.02\n");
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.kind == CsvError::Kind::NonNumericCell);
    CHECK(e.column == "beta");
    CHECK(e.row == 2);
  }

  // Ragged rows are malformed cells, reported with the row number.
  try {
    load_observations(
        "id,log_return,beta,smb,hml,leverage_ratio,short_sale_ratio\n"
        "A,-0.1,1.0,0,0,0.5\n");
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.kind == CsvError::Kind::NonNumericCell);
    CHECK(e.row == 1);
  }
}

TEST_CASE("least squares: noiseless data is recovered exactly") {
  std::mt19937_64 rng(314);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = 60;
  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = g(rng);
    x2[i] = g(rng);
    y[i] = 1.0 + 2.0 * x1[i] - 3.0 * x2[i];
  }
  const RegressionResult r = ols(y, {{"x1", x1}, {"x2", x2}}, true);
  REQUIRE(r.names == std::vector<std::string>{"x1", "x2", "const"});
  CHECK(r.coef[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.coef[1] == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK(r.coef[2] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.n == n);
  CHECK(r.k == 2);
}

TEST_CASE("least squares: five-point hand fixture") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{1, 2, 2, 3, 4};
  const RegressionResult r = ols(y, {{"x", x}}, true);
  CHECK(r.coef[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(r.coef[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.se[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.se[1] == doctest::Approx(std::sqrt(0.11)).epsilon(1e-12));
  CHECK(r.t[0] == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(r.f_stat == doctest::Approx(49.0).epsilon(1e-10));
  CHECK(r.r2 == doctest::Approx(49.0 / 52.0).epsilon(1e-12));
  CHECK(r.r2_adj == doctest::Approx(12.0 / 13.0).epsilon(1e-12));
  CHECK(r.stars[0] == "***");  // t = 7 on 3 degrees of freedom
  CHECK(r.stars[1] == "");     // t ~ 0.9 is nowhere near significant
}

TEST_CASE("least squares: gauss-jordan oracle agreement on random problems") {
  std::mt19937_64 rng(271828);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 200, k = 3;
    const bool intercept = rep % 2 == 0;
    std::vector<std::vector<double>> cols(k, std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) cols[j][i] = g(rng);
      y[i] = 0.5 - 1.2 * cols[0][i] + 0.3 * cols[1][i] + g(rng);
    }
    const RegressionResult r =
        ols(y, {{"a", cols[0]}, {"b", cols[1]}, {"c", cols[2]}}, intercept);
    const std::vector<double> want = testsupport::least_squares_oracle(y, cols, intercept);
    REQUIRE(r.coef.size() == want.size());
    for (std::size_t j = 0; j < want.size(); ++j) {
      CAPTURE(rep);
      CAPTURE(j);
      CHECK(r.coef[j] == doctest::Approx(want[j]).epsilon(1e-8));
    }
  }
}

TEST_CASE("least squares: residuals orthogonal, fit statistics consistent") {
  std::mt19937_64 rng(5897);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = 150;
  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = g(rng);
    x2[i] = 0.4 * x1[i] + g(rng);
    y[i] = -0.2 + 0.9 * x1[i] - 0.5 * x2[i] + 0.8 * g(rng);
  }
  const RegressionResult r = ols(y, {{"x1", x1}, {"x2", x2}}, true);

  auto dot_residual = [&](const std::vector<double>* col) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fit = r.coef[0] * x1[i] + r.coef[1] * x2[i] + r.coef[2];
      acc += (col ? (*col)[i] : 1.0) * (y[i] - fit);
    }
    return acc;
  };
  CHECK(dot_residual(&x1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(dot_residual(&x2) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(dot_residual(nullptr) == doctest::Approx(0.0).epsilon(1e-9));

  const double df = static_cast<double>(n - 3);
  const double f_from_r2 = (r.r2 / 2.0) / ((1.0 - r.r2) / df);
  CHECK(r.f_stat == doctest::Approx(f_from_r2).epsilon(1e-9));
  const double adj = 1.0 - (1.0 - r.r2) * (static_cast<double>(n) - 1.0) / df;
  CHECK(r.r2_adj == doctest::Approx(adj).epsilon(1e-12));
}

TEST_CASE("least squares: degenerate inputs are rejected") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK_THROWS_AS(ols({1, 2, 3}, {{"x", x}}, true), ValidationError);
  CHECK_THROWS_AS(ols({1, 2}, {{"x", {1, 2}}}, true), TooFewObservationsError);
  CHECK_THROWS_AS(ols({5, 5, 5, 5}, {{"x", x}}, true), ValidationError);  // flat response
  CHECK_THROWS_AS(
      ols({1, 2, 3, 4}, {{"x", x}, {"x2", {2, 4, 6, 8}}}, true),  // collinear pair
      RankDeficientError);
  CHECK_THROWS_AS(ols({}, {}, false), ValidationError);
}

TEST_CASE("least squares: no-intercept fit uses uncentered R2") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * v);
  const RegressionResult r = ols(y, {{"x", x}}, false);
  REQUIRE(r.names == std::vector<std::string>{"x"});
  CHECK(r.coef[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!r.intercept);
}

TEST_CASE("student t tail probabilities match reference values") {
  // Reference numbers computed with an independent statistics package.
  CHECK(student_t_two_sided_p(2.46, 840) ==
        doctest::Approx(0.01409409208964414).epsilon(1e-10));
  CHECK(student_t_two_sided_p(0.93, 840) ==
        doctest::Approx(0.3526382656969267).epsilon(1e-10));
  CHECK(student_t_two_sided_p(7.0, 3) ==
        doctest::Approx(0.0059862556977071).epsilon(1e-10));
  CHECK(student_t_two_sided_p(2.0, 10) ==
        doctest::Approx(0.07338803477074039).epsilon(1e-10));
  CHECK(student_t_two_sided_p(1.0, 1) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(student_t_two_sided_p(2.5, 200) ==
        doctest::Approx(0.013223172641700793).epsilon(1e-10));

  CHECK(student_t_two_sided_p(0.0, 17) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(student_t_two_sided_p(-2.0, 10) == student_t_two_sided_p(2.0, 10));
  CHECK(student_t_two_sided_p(INFINITY, 10) == 0.0);
  CHECK(std::isnan(student_t_two_sided_p(std::nan(""), 10)));
  CHECK_THROWS_AS(student_t_two_sided_p(1.0, 0.0), ValidationError);

  double prev = 1.0;
  for (double t = 0.5; t < 6.0; t += 0.5) {
    const double p = student_t_two_sided_p(t, 25);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("star thresholds are inclusive") {
  CHECK(significance_stars(0.009) == "***");
  CHECK(significance_stars(0.01) == "***");
  CHECK(significance_stars(0.011) == "**");
  CHECK(significance_stars(0.05) == "**");
  CHECK(significance_stars(0.051) == "*");
  CHECK(significance_stars(0.10) == "*");
  CHECK(significance_stars(0.11) == "");
  CHECK(significance_stars(1.0) == "");
}

TEST_CASE("observation regressions pick the documented column sets") {
  const ObservationTable t = load_observations(
      "id,log_return,beta,smb,hml,leverage_ratio,short_sale_ratio\n"
      "A,-0.10,1.0,0.1,0.0,0.50,0.01\n"
      "B,-0.20,0.8,0.0,0.1,0.70,0.00\n"
      "C,-0.08,1.2,0.2,-0.1,0.30,0.03\n"
      "D,-0.16,1.1,-0.1,0.0,0.60,0.02\n"
      "E,-0.04,0.9,0.0,0.2,0.20,0.05\n"
      "F,-0.13,1.0,0.1,-0.2,0.55,0.01\n"
      "G,-0.22,1.4,0.3,0.1,0.75,0.00\n"
      "H,-0.07,0.7,-0.2,-0.1,0.25,0.04\n");

  const RegressionResult fac = run_observation_regression(t, RegressorSet::Factors);
  CHECK(fac.names == std::vector<std::string>{"beta", "smb", "hml", "const"});
  const RegressionResult liq = run_observation_regression(t, RegressorSet::Liquidity);
  CHECK(liq.names ==
        std::vector<std::string>{"leverage_ratio", "short_sale_ratio", "const"});
  const RegressionResult all = run_observation_regression(t, RegressorSet::All);
  CHECK(all.names ==
        std::vector<std::string>{"beta", "smb", "hml", "leverage_ratio",
                                 "short_sale_ratio", "const"});
  CHECK(all.n == 8);

  // Same coefficients as calling the engine by hand on the extracted columns.
  const RegressionResult direct =
      ols(column(t, &Observation::log_return),
          {{"leverage_ratio", column(t, &Observation::leverage_ratio)},
           {"short_sale_ratio", column(t, &Observation::short_sale_ratio)}},
          true);
  REQUIRE(direct.coef.size() == liq.coef.size());
  for (std::size_t j = 0; j < direct.coef.size(); ++j)
    CHECK(liq.coef[j] == direct.coef[j]);
}

TEST_CASE("surface smoother: planes are reproduced at every node") {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<SurfacePoint> pts;
  for (int i = 0; i < 80; ++i) {
    const double a = u(rng), b = u(rng);
    pts.push_back({a, b, 2.0 + 0.5 * a - 1.25 * b});
  }
  SmoothSpec spec;
  spec.span = 0.6;
  spec.grid_x1 = 7;
  spec.grid_x2 = 6;
  const SurfaceFit fit = lowess_surface(pts, spec);
  REQUIRE(fit.x1_nodes.size() == 7);
  REQUIRE(fit.x2_nodes.size() == 6);
  REQUIRE(fit.values.size() == 42);
  CHECK(fit.degenerate_count == 0);
  for (std::size_t i = 0; i < fit.x1_nodes.size(); ++i)
    for (std::size_t j = 0; j < fit.x2_nodes.size(); ++j) {
      const double want = 2.0 + 0.5 * fit.x1_nodes[i] - 1.25 * fit.x2_nodes[j];
      CHECK(fit.values[i * fit.x2_nodes.size() + j] ==
            doctest::Approx(want).epsilon(1e-9));
    }

  // Nodes span the data rectangle exactly.
  double lo1 = INFINITY, hi1 = -INFINITY;
  for (const SurfacePoint& p : pts) {
    lo1 = std::min(lo1, p.x1);
    hi1 = std::max(hi1, p.x1);
  }
  CHECK(fit.x1_nodes.front() == lo1);
  CHECK(fit.x1_nodes.back() == hi1);
}

TEST_CASE("surface smoother: constants come back untouched") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SurfacePoint> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({u(rng), u(rng), 3.7});
  const SurfaceFit fit = lowess_surface(pts, SmoothSpec{0.5, 5, 5});
  for (double v : fit.values) CHECK(v == doctest::Approx(3.7).epsilon(1e-12));
}

TEST_CASE("surface smoother: full span equals one global weighted plane") {
  std::mt19937_64 rng(90210);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<SurfacePoint> pts;
  for (int i = 0; i < 40; ++i) {
    const double a = g(rng), b = g(rng);
    pts.push_back({a, b, 0.3 * a - 0.8 * b + 0.5 * g(rng)});
  }
  SmoothSpec spec;
  spec.span = 1.0;
  spec.grid_x1 = 4;
  spec.grid_x2 = 3;
  const SurfaceFit fit = lowess_surface(pts, spec);

  // Standardization used for distances only: sample standard deviations.
  const std::size_t n = pts.size();
  double m1 = 0.0, m2 = 0.0;
  for (const SurfacePoint& p : pts) {
    m1 += p.x1;
    m2 += p.x2;
  }
  m1 /= static_cast<double>(n);
  m2 /= static_cast<double>(n);
  double v1 = 0.0, v2 = 0.0;
  for (const SurfacePoint& p : pts) {
    v1 += (p.x1 - m1) * (p.x1 - m1);
    v2 += (p.x2 - m2) * (p.x2 - m2);
  }
  const double sd1 = std::sqrt(v1 / static_cast<double>(n - 1));
  const double sd2 = std::sqrt(v2 / static_cast<double>(n - 1));

  for (std::size_t i = 0; i < fit.x1_nodes.size(); ++i)
    for (std::size_t j = 0; j < fit.x2_nodes.size(); ++j) {
      const double nx = fit.x1_nodes[i], ny = fit.x2_nodes[j];
      std::vector<double> d(n);
      double dmax = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double du = (pts[r].x1 - nx) / sd1;
        const double dv = (pts[r].x2 - ny) / sd2;
        d[r] = std::sqrt(du * du + dv * dv);
        dmax = std::max(dmax, d[r]);
      }
      // Tricube-weighted plane fit over all points, solved independently.
      std::vector<double> c0(n), c1(n), c2(n), ty(n);
      for (std::size_t r = 0; r < n; ++r) {
        const double frac = d[r] / dmax;
        const double w = std::max(0.0, 1.0 - frac * frac * frac);
        const double sw = std::sqrt(w * w * w);
        c0[r] = sw;
        c1[r] = sw * (pts[r].x1 - nx);
        c2[r] = sw * (pts[r].x2 - ny);
        ty[r] = sw * pts[r].y;
      }
      const std::vector<double> beta =
          testsupport::least_squares_oracle(ty, {c0, c1, c2}, false);
      CHECK(fit.values[i * fit.x2_nodes.size() + j] ==
            doctest::Approx(beta[0]).epsilon(1e-9));
    }
}

TEST_CASE("surface smoother: hopeless neighborhoods fall back to means") {
  // All points stacked on one location: zero spread, mean fallback everywhere.
  std::vector<SurfacePoint> stacked;
  for (int i = 0; i < 10; ++i) stacked.push_back({1.0, 2.0, static_cast<double>(i)});
  const SurfaceFit f1 = lowess_surface(stacked, SmoothSpec{1.0, 2, 2});
  CHECK(f1.degenerate_count == 4);
  for (double v : f1.values) CHECK(v == doctest::Approx(4.5).epsilon(1e-12));

  // Collinear locations: a plane in two variables is unidentified, but the
  // smoother still answers with flagged weighted means.
  std::vector<SurfacePoint> line;
  for (int i = 0; i < 12; ++i) {
    const double x = 0.25 * i;
    line.push_back({x, 2.0 * x, 1.0 + x});
  }
  const SurfaceFit f2 = lowess_surface(line, SmoothSpec{0.5, 3, 3});
  CHECK(f2.degenerate_count > 0);
  for (double v : f2.values) CHECK(std::isfinite(v));
}

TEST_CASE("surface smoother: input validation") {
  std::vector<SurfacePoint> pts;
  for (int i = 0; i < 12; ++i)
    pts.push_back({static_cast<double>(i), static_cast<double>(i % 4), 1.0});
  CHECK_THROWS_AS(lowess_surface(pts, SmoothSpec{0.0, 5, 5}), ValidationError);
  CHECK_THROWS_AS(lowess_surface(pts, SmoothSpec{1.5, 5, 5}), ValidationError);
  CHECK_THROWS_AS(lowess_surface(pts, SmoothSpec{0.5, 1, 5}), ValidationError);
  CHECK_THROWS_AS(lowess_surface(pts, SmoothSpec{0.2, 5, 5}), ValidationError);  // span*n < 4
  std::vector<SurfacePoint> tiny(pts.begin(), pts.begin() + 3);
  CHECK_THROWS_AS(lowess_surface(tiny, SmoothSpec{1.0, 5, 5}), ValidationError);
  pts[3].y = std::nan("");
  CHECK_THROWS_AS(lowess_surface(pts, SmoothSpec{0.5, 5, 5}), ValidationError);
}

TEST_CASE("side-by-side table rendering") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{1, 2, 2, 3, 4};
  const RegressionResult uni = ols(y, {{"x", x}}, true);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> z1(40), z2(40), yy(40);
  for (std::size_t i = 0; i < 40; ++i) {
    z1[i] = g(rng);
    z2[i] = g(rng);
    yy[i] = 0.2 * z1[i] + g(rng);
  }
  const RegressionResult bi = ols(yy, {{"x", z1}, {"z", z2}}, true);

  const std::string table = format_table({uni, bi});
  INFO(table);
  CHECK(table.find("(1)") != std::string::npos);
  CHECK(table.find("(2)") != std::string::npos);
  CHECK(table.find("0.7 (7)***") != std::string::npos);
  CHECK(table.find("0.3 (0.904534)") != std::string::npos);
  CHECK(table.find("F-Statistics") != std::string::npos);
  CHECK(table.find("R² adjusted") != std::string::npos);
  CHECK(table.find("# of samples") != std::string::npos);
  CHECK(table.find("const") != std::string::npos);

  // No trailing whitespace, every line ends cleanly.
  std::size_t start = 0;
  while (start < table.size()) {
    std::size_t nl = table.find('\n', start);
    REQUIRE(nl != std::string::npos);
    if (nl > start) CHECK(table[nl - 1] != ' ');
    start = nl + 1;
  }

  // Shared labels land on one row: "x" appears in both columns.
  const std::size_t x_row = table.find("\nx ");
  REQUIRE(x_row != std::string::npos);
}

TEST_CASE("regression json is deterministic and complete") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{1, 2, 2, 3, 4};
  const RegressionResult r = ols(y, {{"x", x}}, true);
  const std::string text = regression_to_json(r);
  CHECK(regression_to_json(r) == text);
  CHECK(text.back() == '\n');

  const auto j = nlohmann::ordered_json::parse(text);
  CHECK(j.at("coefficients").at("x").at("coef").get<double>() ==
        doctest::Approx(0.7).epsilon(1e-12));
  CHECK(j.at("coefficients").at("x").at("stars").get<std::string>() == "***");
  CHECK(j.at("coefficients").at("const").at("se").get<double>() ==
        doctest::Approx(std::sqrt(0.11)).epsilon(1e-12));
  CHECK(j.at("F").get<double>() == doctest::Approx(49.0).epsilon(1e-10));
  CHECK(j.at("n").get<std::size_t>() == 5);
}
