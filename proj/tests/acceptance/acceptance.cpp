// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kst/error.hpp"
#include "kst/functionals.hpp"
#include "kst/matrixflux.hpp"
#include "kst/solver.hpp"
#include "kst/suites.hpp"
#include "kst/thresholds.hpp"

using namespace kst;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::filesystem::path kSource = KST_SOURCE_DIR;

// 1e5 random unit vectors per dimension 3..6, shared by every matrix of that size.
const std::vector<double>& sphere_samples(int n) {
  static std::vector<std::vector<double>> pools(7);
  auto& p = pools[n];
  if (p.empty()) {
    std::mt19937_64 rng(1000 + n);
    std::normal_distribution<double> g;
    p.resize(100000 * static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < p.size(); k += n) {
      double norm = 0.0;
      for (int i = 0; i < n; ++i) {
        p[k + i] = g(rng);
        norm += p[k + i] * p[k + i];
      }
      for (int i = 0; i < n; ++i) p[k + i] /= std::sqrt(norm);
    }
  }
  return p;
}

// Sphere oracle for min_{|x|=1} x.Ux: best sampled unit vector, then
// Rayleigh-quotient descent from that point using only products with U.
double sphere_oracle(const Matrix& u) {
  const int n = static_cast<int>(u.rows());
  double s[6][6];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s[i][j] = 0.5 * (u(i, j) + u(j, i));
  auto quad = [&](const double* x) {
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = 0.0;
      for (int j = 0; j < n; ++j) r += s[i][j] * x[j];
      q += x[i] * r;
    }
    return q;
  };
  const auto& pool = sphere_samples(n);
  double best[6];
  double lo = INFINITY;
  for (std::size_t k = 0; k < pool.size(); k += n) {
    const double q = quad(&pool[k]);
    if (q < lo) {
      lo = q;
      for (int i = 0; i < n; ++i) best[i] = pool[k + i];
    }
  }
  for (int it = 0; it < 5000; ++it) {
    double sx[6], q = 0.0, gn = 0.0, norm = 0.0;
    for (int i = 0; i < n; ++i) {
      sx[i] = 0.0;
      for (int j = 0; j < n; ++j) sx[i] += s[i][j] * best[j];
      q += best[i] * sx[i];
    }
    for (int i = 0; i < n; ++i) {
      const double gi = sx[i] - q * best[i];
      gn += gi * gi;
      best[i] -= 0.4 * gi;
      norm += best[i] * best[i];
    }
    for (int i = 0; i < n; ++i) best[i] /= std::sqrt(norm);
    if (gn < 1e-28) break;
  }
  return std::min(lo, quad(best));
}

Verdict matrix_suite() {
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> g;
  double worst_rec = 0.0, worst_orth = 0.0;
  int disagree = 0, holds = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 3 + t % 4;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    const FluxTensor f = FluxTensor::from_matrix(a);
    worst_rec = std::max(worst_rec, (f.p() * f.u_orth() - a).norm() / a.norm());
    worst_orth = std::max(worst_orth, (f.u_orth().transpose() * f.u_orth() - Matrix::Identity(n, n)).norm());
    const bool oracle = sphere_oracle(f.u_orth()) > 1e-12;
    if (oracle != f.hypothesis_holds()) ++disagree;
    if (f.hypothesis_holds()) ++holds;
  }
  return {worst_rec <= 1e-12 && worst_orth <= 1e-12 && disagree == 0,
          fmt("reconstruction %.2e, orthogonality %.2e, verdict disagreements %d/1000 (%d satisfy)", worst_rec,
              worst_orth, disagree, holds)};
}

Verdict suite_verdict(const std::string& name) {
  const SuiteReport r = run_suites(name).front();
  std::size_t passed = 0;
  double worst = INFINITY;
  for (const auto& c : r.cases) {
    passed += c.pass;
    worst = std::min(worst, c.margin);
  }
  return {r.pass(), fmt("%zu/%zu cases, smallest margin %.3e", passed, r.cases.size(), worst)};
}

Verdict biler() {
  Verdict v = suite_verdict("biler");
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  // X - Y ~ N(0, 2I) for independent unit Gaussians.
  double sum = 0.0;
  const long samples = 10000000;
  for (long s = 0; s < samples; ++s) {
    const double a = g(rng), b = g(rng), c = g(rng);
    sum += 1.0 / std::sqrt(2.0 * (a * a + b * b + c * c));
  }
  const double mc = sum / samples;
  const double grid = interaction_integral(gaussian_density(Grid3(64, 8.0), 1.0, 1.0, 1.0, 1.0));
  const double rel = std::abs(grid - mc) / mc;
  v.pass = v.pass && rel <= 0.01;
  v.detail += fmt("; J grid %.6f, Monte-Carlo %.6f (1/sqrt(pi) = %.6f), rel diff %.2e", grid, mc, 1.0 / std::sqrt(kPi),
                  rel);
  return v;
}

Verdict threshold_arithmetic() {
  const FluxTensor id = FluxTensor::from_matrix(Matrix::Identity(3, 3));
  const double c1 = blowup_constant(id, 1.0, 3);
  const double exact = 1.0 / (1152.0 * kPi * kPi);
  const double e1 = std::abs(c1 - exact) / exact;
  const double e2 = std::abs(blowup_constant(id, 2.0, 3) / c1 - 4.0);
  const double e3 = std::abs(blowup_constant(FluxTensor::from_matrix(rotation_z(kPi / 3)), 1.0, 3) / c1 - 0.25);
  return {e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-12,
          fmt("C_Bl = %.12e (rel err %.1e), chi x2 ratio err %.1e, Rot_z(pi/3) ratio err %.1e", c1, e1, e2, e3)};
}

struct RunLog {
  std::string name;
  SimOutcome outcome;
};
std::vector<RunLog> g_runs;

SimOutcome logged_run(const std::string& name, const SimConfig& c) {
  SimOutcome o = run(c);
  g_runs.push_back({name, o});
  return o;
}

Verdict blowup_experiment() {
  const SimOutcome o = logged_run("blowup", read_config(kSource / "presets/blowup.cfg"));
  const auto& r = o.records;
  bool decreasing = r.size() >= 3;
  double excess = -INFINITY;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i > 0 && !(r[i].w < r[i - 1].w)) decreasing = false;
    excess = std::max(excess, r[i].dwdt_measured - r[i].dwdt_bound - 0.05 * std::abs(r[i].dwdt_bound));
  }
  const bool blew = o.status == RunStatus::NumericalBlowup;
  return {blew && decreasing && excess <= 0.0,
          fmt("status %s at t=%.4f after %zu steps (chi=%.4g, %s), %zu records, w strictly decreasing: %s, "
              "max(dw/dt - bound - 5%%|bound|) = %.3g",
              to_string(o.status), o.t_final, o.steps, o.chi, o.evidence ? o.evidence->trigger.c_str() : "-",
              r.size(), decreasing ? "yes" : "no", excess)};
}

Verdict global_experiment() {
  const SimConfig c = read_config(kSource / "presets/global.cfg");
  const SimOutcome o = logged_run("global", c);
  const auto& r = o.records;
  bool lq_ok = !r.empty();
  double worst = -INFINITY;
  for (std::size_t i = 1; i < r.size(); ++i) {
    worst = std::max(worst, r[i].lq - r[i - 1].lq);
    if (r[i].lq > r[i - 1].lq + 1e-6) lq_ok = false;
  }
  const bool reached = o.status == RunStatus::CompletedToTEnd && std::abs(o.t_final - c.t_end) <= 1e-9;
  const bool bounded = !r.empty() && r.back().linf <= r.front().linf;
  return {reached && bounded && lq_ok,
          fmt("status %s at t=%.4f, linf %.4e -> %.4e, max L^{3/2} increment %.3e", to_string(o.status), o.t_final,
              r.empty() ? 0.0 : r.front().linf, r.empty() ? 0.0 : r.back().linf, worst)};
}

Verdict moment_identity() {
  SimConfig control;
  control.chi = 0.0;
  control.n_cells = 64;
  control.half_width = 8.0;
  control.t_end = 0.5;
  control.dt_max = 0.01;
  control.diag_every = 5;
  const SimOutcome a = logged_run("control", control);
  double worst0 = 0.0;
  for (const auto& r : a.records) {
    worst0 = std::max(worst0, std::abs(r.dwdt_measured - 6.0 * r.mass) / (6.0 * r.mass));
  }

  SimConfig smooth = control;
  smooth.a = rotation_z(kPi / 4);
  smooth.chi = 5.0;
  smooth.half_width = 6.0;
  smooth.t_end = 0.1;
  smooth.dt_max = 2e-3;
  const SimOutcome b = logged_run("smooth", smooth);
  double worst1 = 0.0;
  for (const auto& r : b.records) {
    worst1 = std::max(worst1, std::abs(r.dwdt_measured - r.dwdt_rhs) / std::abs(r.dwdt_rhs));
  }
  const bool ok = a.status == RunStatus::CompletedToTEnd && b.status == RunStatus::CompletedToTEnd &&
                  a.records.size() >= 3 && b.records.size() >= 3 && worst0 <= 0.01 && worst1 <= 0.05;
  return {ok, fmt("chi=0: max |dm/dt - 6M|/6M = %.2e over %zu records; chi=5: max rel deviation from identity %.2e "
                  "over %zu records",
                  worst0, a.records.size(), worst1, b.records.size())};
}

Verdict conservation() {
  double drift = 0.0, lo = INFINITY;
  std::string names;
  for (const auto& r : g_runs) {
    drift = std::max(drift, r.outcome.max_mass_drift);
    lo = std::min(lo, r.outcome.min_value_seen);
    names += (names.empty() ? "" : ",") + r.name;
  }
  return {!g_runs.empty() && drift <= 1e-8 && lo >= 0.0,
          fmt("runs [%s]: max mass drift %.2e, min u %.3e", names.c_str(), drift, lo)};
}

Verdict gradv_bound() {
  Verdict v = suite_verdict("gradv-bound");
  const double gamma = gradv_sup_bound(1.0, 1.0, 3).gamma_used;
  const double exact = std::cbrt(1.0 / (2.0 * kPi));
  v.pass = v.pass && std::abs(gamma - exact) <= 1e-10 * exact;
  v.detail += fmt("; gamma* = %.12f (closed form %.12f)", gamma, exact);
  return v;
}

Verdict rescaling() {
  const Matrix a = rotation_z(kPi / 4);
  const FluxTensor f = FluxTensor::from_matrix(a);
  const double chi = 100.0;
  const Grid3 g(64, 8.0);
  const DensityField u = gaussian_density(g, 1.0, 1.0, 0.8, 1.2, 0.25, -0.1, 0.0);
  const double m0 = second_moment(u), mass0 = mass(u);
  const bool inadmissible = !admissibility(m0, mass0, f, chi, 3).admissible;
  const double eps = rescale_epsilon(m0, mass0, f, chi, 3);

  // u_eps(x) = eps^{-3} u(x / eps) on the correspondingly scaled grid.
  DensityField r(Grid3(g.n(), eps * g.half_width()));
  for (std::size_t i = 0; i < u.values.size(); ++i) r.values[i] = u.values[i] / (eps * eps * eps);
  const double m1 = second_moment(r), mass1 = mass(r);
  const BlowupVerdict after = admissibility(m1, mass1, f, chi, 3);
  const double drift = std::abs(mass1 - mass0) / mass0;
  return {inadmissible && after.admissible && drift <= 1e-6,
          fmt("m0 = %.4f > C_Bl M^3 = %.4f, eps = %.6f, rescaled m = %.6f admissible: %s, mass drift %.1e", m0,
              blowup_constant(f, chi, 3) * mass0 * mass0 * mass0, eps, m1, after.admissible ? "yes" : "no", drift)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"matrix suite", matrix_suite},
      {"potential oracle", [] { return suite_verdict("potential-oracle"); }},
      {"Biler inequality", biler},
      {"threshold arithmetic", threshold_arithmetic},
      {"blow-up experiment", blowup_experiment},
      {"global regime experiment", global_experiment},
      {"conservation and positivity", conservation},
      {"moment identity", moment_identity},
      {"gradient bound", gradv_bound},
      {"rescaling", rescaling},
  };
  // Criterion 7 inspects the runs of 5, 6 and 8, so 8 runs first.
  const std::vector<int> order = {0, 1, 2, 3, 4, 5, 7, 6, 8, 9};

  std::vector<std::string> lines(criteria.size());
  int failures = 0;
  for (int idx : order) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[idx].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", idx + 1,
                criteria[idx].first.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
