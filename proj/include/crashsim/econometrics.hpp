#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "crashsim/errors.hpp"

namespace crashsim {

// One cross-sectional observation: a realized crash return plus the exposures
// and frictions it is regressed on.
struct Observation {
    std::string id;
    double log_return = 0.0;
    double beta = 0.0;
    double smb = 0.0;
    double hml = 0.0;
    double leverage_ratio = 0.0;
    double short_sale_ratio = 0.0;
};

struct ObservationTable {
    std::vector<Observation> rows;
    std::size_t size() const { return rows.size(); }
};

// Strict CSV reader: header must contain exactly the Observation fields (any
// order), every cell must parse as its type, at least one data row. Throws
// CsvError (MissingColumn / UnexpectedColumn / NonNumericCell / EmptyTable).
ObservationTable load_observations(std::string_view csv_text);
ObservationTable load_observations_file(const std::string& path);

struct NamedColumn {
    std::string name;
    std::vector<double> values;
};

struct RegressionResult {
    std::vector<std::string> names;  // regressors in input order; "const" last when present
    std::vector<double> coef;
    std::vector<double> se;  // classical homoskedastic standard errors
    std::vector<double> t;
    std::vector<std::string> stars;  // "***" p<=1%, "**" p<=5%, "*" p<=10%
    double f_stat = 0.0;
    double r2 = 0.0;
    double r2_adj = 0.0;
    std::size_t n = 0;
    std::size_t k = 0;  // slope regressors, intercept excluded
    bool intercept = false;
};

// OLS by normal equations with a Cholesky solve. The Gram pivot guard
// (1e-10 * max diagonal) throws RankDeficientError on collinear columns;
// n <= #parameters throws TooFewObservationsError; mismatched column lengths
// or zero-variance y throw ValidationError.
RegressionResult ols(const std::vector<double>& y, const std::vector<NamedColumn>& x,
                     bool intercept);

// Two-sided p-value of Student's t via the regularized incomplete beta
// function (continued fraction).
double student_t_two_sided_p(double t, double dof);

std::string significance_stars(double p);

// The three regressor sets reported for crash returns: market factor loadings,
// funding frictions, and their union. Intercept always included.
enum class RegressorSet { Factors, Liquidity, All };

RegressionResult run_observation_regression(const ObservationTable& table, RegressorSet set);

// Locally weighted plane smoother on scattered (x1, x2, y) data, evaluated on
// a rectangular node grid spanning the data.
struct SmoothSpec {
    double span = 0.5;  // fraction of points in each local fit, (0, 1]
    std::size_t grid_x1 = 25;
    std::size_t grid_x2 = 25;
};

struct SurfacePoint {
    double x1;
    double x2;
    double y;
};

struct SurfaceFit {
    std::vector<double> x1_nodes;
    std::vector<double> x2_nodes;
    std::vector<double> values;             // x1-major: values[i * x2_nodes.size() + j]
    std::vector<unsigned char> degenerate;  // 1 where the local fit fell back to a mean
    std::size_t degenerate_count = 0;
};

// Tricube-weighted local plane at each node, fit to the ceil(span*n) nearest
// points (distance in per-axis standardized units). A node whose neighborhood
// cannot support a plane (coincident or collinear points) falls back to the
// weighted neighborhood mean and is flagged, never thrown.
SurfaceFit lowess_surface(const std::vector<SurfacePoint>& pts, const SmoothSpec& spec);

// Side-by-side coefficient table, one column per result, stars appended,
// t-statistics in parentheses, F / adjusted R^2 / sample-size footer.
std::string format_table(const std::vector<RegressionResult>& results);

// Machine form: {"coefficients": {name: {coef, se, t, stars}}, "F": ...,
// "r2": ..., "r2_adj": ..., "n": ...}. Deterministic bytes.
std::string regression_to_json(const RegressionResult& r);

}  // namespace crashsim
