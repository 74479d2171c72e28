#include "crashsim/econometrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "crashsim/sweep.hpp"

namespace crashsim {

// ---------------------------------------------------------------------------
// Observation CSV

namespace {

constexpr const char* kColumns[] = {"id",  "log_return",     "beta",           "smb",
                                    "hml", "leverage_ratio", "short_sale_ratio"};
constexpr std::size_t kNumColumns = sizeof(kColumns) / sizeof(kColumns[0]);

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

double parse_numeric(std::string_view text, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value))
        throw CsvError::non_numeric_cell(row, column, std::string(text));
    return value;
}

}  // namespace

ObservationTable load_observations(std::string_view csv_text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= csv_text.size(); ++i) {
        if (i == csv_text.size() || csv_text[i] == '\n') {
            const std::string_view line = trim(csv_text.substr(start, i - start));
            if (!line.empty()) lines.push_back(line);
            start = i + 1;
        }
    }
    if (lines.empty()) throw CsvError::empty_table();

    // Header: exactly the expected names, any order.
    const std::vector<std::string_view> header = split_fields(lines[0]);
    std::vector<int> position(kNumColumns, -1);
    for (std::size_t h = 0; h < header.size(); ++h) {
        const auto it = std::find_if(std::begin(kColumns), std::end(kColumns),
                                     [&](const char* c) { return header[h] == c; });
        if (it == std::end(kColumns))
            throw CsvError::unexpected_column(std::string(header[h]));
        const std::size_t idx = static_cast<std::size_t>(it - std::begin(kColumns));
        if (position[idx] >= 0)
            throw CsvError::unexpected_column(std::string(header[h]) + " (duplicate)");
        position[idx] = static_cast<int>(h);
    }
    for (std::size_t c = 0; c < kNumColumns; ++c)
        if (position[c] < 0) throw CsvError::missing_column(kColumns[c]);

    ObservationTable table;
    table.rows.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::vector<std::string_view> fields = split_fields(lines[r]);
        if (fields.size() != header.size())
            throw CsvError(CsvError::Kind::NonNumericCell,
                           "row " + std::to_string(r) + " has " +
                               std::to_string(fields.size()) + " cells, expected " +
                               std::to_string(header.size()),
                           "", r);
        Observation obs;
        obs.id = std::string(fields[position[0]]);
        obs.log_return = parse_numeric(fields[position[1]], r, kColumns[1]);
        obs.beta = parse_numeric(fields[position[2]], r, kColumns[2]);
        obs.smb = parse_numeric(fields[position[3]], r, kColumns[3]);
        obs.hml = parse_numeric(fields[position[4]], r, kColumns[4]);
        obs.leverage_ratio = parse_numeric(fields[position[5]], r, kColumns[5]);
        obs.short_sale_ratio = parse_numeric(fields[position[6]], r, kColumns[6]);
        table.rows.push_back(std::move(obs));
    }
    if (table.rows.empty()) throw CsvError::empty_table();
    return table;
}

ObservationTable load_observations_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read observations file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    return load_observations(text);
}

// ---------------------------------------------------------------------------
// Linear algebra: Cholesky on the Gram matrix with a rank guard.

namespace {

// In-place lower-triangular factorization of a symmetric positive definite
// p x p matrix (row-major). A pivot at or below 1e-10 * max diagonal means a
// numerically rank-deficient design.
void cholesky(std::vector<double>& A, std::size_t p) {
    double max_diag = 0.0;
    for (std::size_t j = 0; j < p; ++j) max_diag = std::max(max_diag, A[j * p + j]);
    const double threshold = 1e-10 * max_diag;
    for (std::size_t j = 0; j < p; ++j) {
        double d = A[j * p + j];
        for (std::size_t t = 0; t < j; ++t) d -= A[j * p + t] * A[j * p + t];
        if (!(d > threshold))
            throw RankDeficientError("Gram matrix pivot below rank threshold (collinear regressors?)");
        A[j * p + j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < p; ++i) {
            double v = A[i * p + j];
            for (std::size_t t = 0; t < j; ++t) v -= A[i * p + t] * A[j * p + t];
            A[i * p + j] = v / A[j * p + j];
        }
    }
}

std::vector<double> cholesky_solve(const std::vector<double>& L, std::size_t p,
                                   std::vector<double> b) {
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t t = 0; t < i; ++t) b[i] -= L[i * p + t] * b[t];
        b[i] /= L[i * p + i];
    }
    for (std::size_t ii = p; ii-- > 0;) {
        for (std::size_t t = ii + 1; t < p; ++t) b[ii] -= L[t * p + ii] * b[t];
        b[ii] /= L[ii * p + ii];
    }
    return b;
}

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Student t tail probability via the regularized incomplete beta function.

namespace {

// Continued-fraction kernel (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) throw ValidationError("degrees of freedom must be > 0");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    return reg_inc_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

std::string significance_stars(double p) {
    if (p <= 0.01) return "***";
    if (p <= 0.05) return "**";
    if (p <= 0.10) return "*";
    return "";
}

// ---------------------------------------------------------------------------
// OLS

RegressionResult ols(const std::vector<double>& y, const std::vector<NamedColumn>& x,
                     bool intercept) {
    const std::size_t n = y.size();
    const std::size_t k = x.size();
    if (k == 0) throw ValidationError("at least one regressor is required");
    for (const NamedColumn& c : x)
        if (c.values.size() != n)
            throw ValidationError("column '" + c.name + "' length does not match y");
    const std::size_t p = k + (intercept ? 1u : 0u);
    if (n <= p)
        throw TooFewObservationsError("need more observations than parameters (n=" +
                                      std::to_string(n) + ", parameters=" + std::to_string(p) +
                                      ")");

    // Design column j of p; the intercept is the last column.
    const auto col = [&](std::size_t j, std::size_t i) -> double {
        return j < k ? x[j].values[i] : 1.0;
    };

    std::vector<double> G(p * p, 0.0), rhs(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j1 = 0; j1 < p; ++j1) {
            const double v1 = col(j1, i);
            rhs[j1] += v1 * y[i];
            for (std::size_t j2 = j1; j2 < p; ++j2) G[j1 * p + j2] += v1 * col(j2, i);
        }
    }
    for (std::size_t j1 = 0; j1 < p; ++j1)
        for (std::size_t j2 = 0; j2 < j1; ++j2) G[j1 * p + j2] = G[j2 * p + j1];

    std::vector<double> L = G;
    cholesky(L, p);
    const std::vector<double> beta = cholesky_solve(L, p, rhs);

    double sse = 0.0;
    double y_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fit = 0.0;
        for (std::size_t j = 0; j < p; ++j) fit += beta[j] * col(j, i);
        const double e = y[i] - fit;
        sse += e * e;
        y_sum += y[i];
    }
    const double y_bar = y_sum / static_cast<double>(n);
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = intercept ? y[i] - y_bar : y[i];
        sst += d * d;
    }
    if (!(sst > 0.0)) throw ValidationError("response has zero variance");

    const double df_resid = static_cast<double>(n - p);
    const double sigma2 = sse / df_resid;

    RegressionResult r;
    r.n = n;
    r.k = k;
    r.intercept = intercept;
    r.coef = beta;
    r.r2 = 1.0 - sse / sst;
    r.r2_adj = 1.0 - (1.0 - r.r2) * static_cast<double>(n - 1) /
                         static_cast<double>(n - k - 1);
    r.f_stat = ((sst - sse) / static_cast<double>(k)) / (sse / df_resid);

    r.names.reserve(p);
    for (const NamedColumn& c : x) r.names.push_back(c.name);
    if (intercept) r.names.push_back("const");

    r.se.resize(p);
    r.t.resize(p);
    r.stars.resize(p);
    std::vector<double> unit(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        std::fill(unit.begin(), unit.end(), 0.0);
        unit[j] = 1.0;
        const double inv_jj = cholesky_solve(L, p, unit)[j];
        r.se[j] = std::sqrt(sigma2 * inv_jj);
        r.t[j] = r.coef[j] / r.se[j];
        r.stars[j] = significance_stars(student_t_two_sided_p(r.t[j], df_resid));
    }
    return r;
}

RegressionResult run_observation_regression(const ObservationTable& table, RegressorSet set) {
    std::vector<double> y;
    y.reserve(table.size());
    for (const Observation& o : table.rows) y.push_back(o.log_return);

    const auto column = [&](const char* name, double Observation::*field) {
        NamedColumn c;
        c.name = name;
        c.values.reserve(table.size());
        for (const Observation& o : table.rows) c.values.push_back(o.*field);
        return c;
    };

    std::vector<NamedColumn> x;
    if (set == RegressorSet::Factors || set == RegressorSet::All) {
        x.push_back(column("beta", &Observation::beta));
        x.push_back(column("smb", &Observation::smb));
        x.push_back(column("hml", &Observation::hml));
    }
    if (set == RegressorSet::Liquidity || set == RegressorSet::All) {
        x.push_back(column("leverage_ratio", &Observation::leverage_ratio));
        x.push_back(column("short_sale_ratio", &Observation::short_sale_ratio));
    }
    return ols(y, x, /*intercept=*/true);
}

// ---------------------------------------------------------------------------
// LOWESS surface

SurfaceFit lowess_surface(const std::vector<SurfacePoint>& pts, const SmoothSpec& spec) {
    const std::size_t n = pts.size();
    if (!(spec.span > 0.0 && spec.span <= 1.0))
        throw ValidationError("span must be in (0, 1]");
    if (spec.grid_x1 < 2 || spec.grid_x2 < 2)
        throw ValidationError("grid dimensions must be >= 2");
    if (!(spec.span * static_cast<double>(n) >= 4.0))
        throw ValidationError("span * n must be >= 4 (not enough points for a local plane)");
    for (const SurfacePoint& q : pts)
        if (!std::isfinite(q.x1) || !std::isfinite(q.x2) || !std::isfinite(q.y))
            throw ValidationError("surface points must be finite");

    std::size_t k = static_cast<std::size_t>(std::ceil(spec.span * static_cast<double>(n)));
    k = std::min(k, n);

    double min1 = pts[0].x1, max1 = pts[0].x1, min2 = pts[0].x2, max2 = pts[0].x2;
    double m1 = 0.0, m2 = 0.0;
    for (const SurfacePoint& q : pts) {
        min1 = std::min(min1, q.x1);
        max1 = std::max(max1, q.x1);
        min2 = std::min(min2, q.x2);
        max2 = std::max(max2, q.x2);
        m1 += q.x1;
        m2 += q.x2;
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    double v1 = 0.0, v2 = 0.0;
    for (const SurfacePoint& q : pts) {
        v1 += (q.x1 - m1) * (q.x1 - m1);
        v2 += (q.x2 - m2) * (q.x2 - m2);
    }
    // Per-axis standardization for the neighbor metric only; degenerate axes
    // get unit scale so distances stay finite.
    double sd1 = n > 1 ? std::sqrt(v1 / static_cast<double>(n - 1)) : 0.0;
    double sd2 = n > 1 ? std::sqrt(v2 / static_cast<double>(n - 1)) : 0.0;
    if (!(sd1 > 0.0)) sd1 = 1.0;
    if (!(sd2 > 0.0)) sd2 = 1.0;

    SurfaceFit fit;
    fit.x1_nodes = linspace(min1, max1, spec.grid_x1);
    fit.x2_nodes = linspace(min2, max2, spec.grid_x2);
    fit.values.assign(spec.grid_x1 * spec.grid_x2, 0.0);
    fit.degenerate.assign(spec.grid_x1 * spec.grid_x2, 0);

    std::vector<std::size_t> order(n);
    std::vector<double> dist2(n);

    for (std::size_t gi = 0; gi < spec.grid_x1; ++gi) {
        for (std::size_t gj = 0; gj < spec.grid_x2; ++gj) {
            const double nx = fit.x1_nodes[gi];
            const double ny = fit.x2_nodes[gj];
            for (std::size_t i = 0; i < n; ++i) {
                const double d1 = (pts[i].x1 - nx) / sd1;
                const double d2 = (pts[i].x2 - ny) / sd2;
                dist2[i] = d1 * d1 + d2 * d2;
                order[i] = i;
            }
            std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                             [&](std::size_t a, std::size_t b) { return dist2[a] < dist2[b]; });
            const double d_max = std::sqrt(dist2[order[k - 1]]);

            const std::size_t slot = gi * spec.grid_x2 + gj;
            if (!(d_max > 0.0)) {
                // Every neighbor coincides with the node; a plane is meaningless.
                double mean = 0.0;
                for (std::size_t r = 0; r < k; ++r) mean += pts[order[r]].y;
                fit.values[slot] = mean / static_cast<double>(k);
                fit.degenerate[slot] = 1;
                ++fit.degenerate_count;
                continue;
            }

            // Tricube-weighted plane centered at the node: the intercept of the
            // local fit is the fitted value.
            double A[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
            double rhs[3] = {0, 0, 0};
            double w_sum = 0.0, wy_sum = 0.0;
            for (std::size_t r = 0; r < k; ++r) {
                const SurfacePoint& q = pts[order[r]];
                const double ratio = std::sqrt(dist2[order[r]]) / d_max;
                const double base = std::max(0.0, 1.0 - ratio * ratio * ratio);
                const double w = base * base * base;
                const double u = q.x1 - nx;
                const double v = q.x2 - ny;
                A[0] += w;
                A[1] += w * u;
                A[2] += w * v;
                A[4] += w * u * u;
                A[5] += w * u * v;
                A[8] += w * v * v;
                rhs[0] += w * q.y;
                rhs[1] += w * u * q.y;
                rhs[2] += w * v * q.y;
                w_sum += w;
                wy_sum += w * q.y;
            }
            A[3] = A[1];
            A[6] = A[2];
            A[7] = A[5];

            try {
                std::vector<double> M(A, A + 9);
                cholesky(M, 3);
                fit.values[slot] = cholesky_solve(M, 3, {rhs[0], rhs[1], rhs[2]})[0];
            } catch (const RankDeficientError&) {
                // Collinear neighborhood: fall back to the weighted mean.
                if (w_sum > 0.0) {
                    fit.values[slot] = wy_sum / w_sum;
                } else {
                    double mean = 0.0;
                    for (std::size_t r = 0; r < k; ++r) mean += pts[order[r]].y;
                    fit.values[slot] = mean / static_cast<double>(k);
                }
                fit.degenerate[slot] = 1;
                ++fit.degenerate_count;
            }
        }
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Rendering

std::string format_table(const std::vector<RegressionResult>& results) {
    // Row labels: slope regressors in first-appearance order, then the
    // intercept row, then the footer block.
    std::vector<std::string> labels;
    bool any_intercept = false;
    for (const RegressionResult& r : results) {
        for (std::size_t j = 0; j < r.names.size(); ++j) {
            if (r.intercept && j + 1 == r.names.size()) continue;
            if (std::find(labels.begin(), labels.end(), r.names[j]) == labels.end())
                labels.push_back(r.names[j]);
        }
        any_intercept = any_intercept || r.intercept;
    }
    if (any_intercept) labels.push_back("const");

    const auto cell_for = [&](const RegressionResult& r, const std::string& label) -> std::string {
        for (std::size_t j = 0; j < r.names.size(); ++j) {
            if (r.names[j] != label) continue;
            if (label == "const" && !(r.intercept && j + 1 == r.names.size())) continue;
            return fmt6(r.coef[j]) + " (" + fmt6(r.t[j]) + ")" + r.stars[j];
        }
        return "";
    };

    std::vector<std::vector<std::string>> grid;  // rows x (1 + #results)
    std::vector<std::string> head{""};
    for (std::size_t c = 0; c < results.size(); ++c)
        head.push_back("(" + std::to_string(c + 1) + ")");
    grid.push_back(head);
    for (const std::string& label : labels) {
        std::vector<std::string> row{label};
        for (const RegressionResult& r : results) row.push_back(cell_for(r, label));
        grid.push_back(std::move(row));
    }
    std::vector<std::string> f_row{"F-Statistics"}, r2_row{"R² adjusted"}, n_row{"# of samples"};
    for (const RegressionResult& r : results) {
        f_row.push_back(fmt6(r.f_stat));
        r2_row.push_back(fmt6(r.r2_adj));
        n_row.push_back(std::to_string(r.n));
    }
    grid.push_back(std::move(f_row));
    grid.push_back(std::move(r2_row));
    grid.push_back(std::move(n_row));

    // Width bookkeeping treats the superscript-two byte pair as one glyph.
    const auto display_width = [](const std::string& s) {
        std::size_t w = 0;
        for (unsigned char ch : s)
            if ((ch & 0xc0) != 0x80) ++w;
        return w;
    };
    std::vector<std::size_t> widths(1 + results.size(), 0);
    for (const auto& row : grid)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], display_width(row[c]));

    std::string out;
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            const std::size_t pad = widths[c] - display_width(row[c]);
            if (c == 0) {
                out += row[c];
                out.append(pad, ' ');
            } else {
                out += "  ";
                out.append(pad, ' ');
                out += row[c];
            }
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

std::string regression_to_json(const RegressionResult& r) {
    nlohmann::ordered_json j;
    auto& coeffs = j["coefficients"] = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        nlohmann::ordered_json c;
        c["coef"] = r.coef[i];
        c["se"] = r.se[i];
        c["t"] = r.t[i];
        c["stars"] = r.stars[i];
        coeffs[r.names[i]] = std::move(c);
    }
    j["F"] = r.f_stat;
    j["r2"] = r.r2;
    j["r2_adj"] = r.r2_adj;
    j["n"] = r.n;
    return j.dump(2) + "\n";
}

}  // namespace crashsim
