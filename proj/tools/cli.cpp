#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>

#include "kst/error.hpp"
#include "kst/matrixflux.hpp"
#include "kst/solver.hpp"
#include "kst/suites.hpp"
#include "kst/thresholds.hpp"

namespace kst::cli {

namespace {

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string join(const std::vector<double>& v) {
  if (v.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
  return s;
}

void print_matrix(std::ostream& out, const std::string& label, const Matrix& m) {
  out << label << " =\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << " ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << " " << num(m(i, j));
    out << "\n";
  }
}

struct MatrixSource {
  std::string list;
  std::string file;

  void add_to(CLI::App* app) {
    auto* l = app->add_option("--matrix", list, "Row-major comma list of entries");
    auto* f = app->add_option("--matrix-file", file, "File with one matrix row per line");
    l->excludes(f);
  }

  Matrix load() const {
    if (!file.empty()) return read_matrix_file(file);
    if (!list.empty()) return parse_matrix_list(list);
    throw Error(ErrorCode::ParseError, "one of --matrix or --matrix-file is required");
  }
};

int check_matrix(const MatrixSource& src, std::ostream& out) {
  const FluxTensor f = FluxTensor::from_matrix(src.load());
  print_matrix(out, "P", f.p());
  print_matrix(out, "U", f.u_orth());
  out << "angles = " << join(f.angles()) << "\n";
  out << "real_eigenvalues = " << join(f.real_eigs()) << "\n";
  out << "kappa = " << num(f.kappa()) << "\n";
  out << "lambda_min = " << num(f.lam_min()) << "\n";
  out << "lambda_max = " << num(f.lam_max()) << "\n";
  out << "trace_p_inv = " << num(f.trace_pinv()) << "\n";
  out << "margin = " << num(f.margin()) << "\n";
  out << "hypothesis = " << (f.hypothesis_holds() ? "true" : "false") << "\n";
  return f.hypothesis_holds() ? kOk : kHypothesisFails;
}

struct ThresholdArgs {
  MatrixSource matrix;
  double chi = 1.0;
  int dim = 3;
  double mass = 1.0;
  double moment = 0.0;
};

int thresholds(const ThresholdArgs& a, std::ostream& out) {
  const bool given = !a.matrix.list.empty() || !a.matrix.file.empty();
  if (!given && a.dim < 3) throw Error(ErrorCode::BadParameter, "dim must be >= 3");
  const FluxTensor f = FluxTensor::from_matrix(given ? a.matrix.load() : Matrix::Identity(a.dim, a.dim));
  const BlowupVerdict v = admissibility(a.moment, a.mass, f, a.chi, a.dim);
  const double eps = a.moment > 0.0 ? rescale_epsilon(a.moment, a.mass, f, a.chi, a.dim)
                                    : std::numeric_limits<double>::infinity();
  out << "c_bl=" << num(v.c_bl) << "\n";
  out << "admissible=" << (v.admissible ? "true" : "false") << "\n";
  out << "margin=" << num(v.margin) << "\n";
  out << "epsilon=" << num(eps) << "\n";
  out << "t_upper=" << (v.t_upper ? num(*v.t_upper) : "none") << "\n";
  out << "f_w0=" << num(v.f_w0) << "\n";
  return kOk;
}

int simulate(const std::string& config_path, const std::string& output_dir, std::ostream& out) {
  SimConfig config = read_config(config_path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (config.output_dir.empty()) config.output_dir = ".";
  std::filesystem::create_directories(config.output_dir);

  const SimOutcome o = run(config);
  write_diagnostics_csv(config.output_dir / "diagnostics.csv", o.records);
  write_outcome(config.output_dir / "outcome.txt", o);

  out << "status=" << to_string(o.status) << "\n";
  out << "t_final=" << num(o.t_final) << "\n";
  out << "steps=" << o.steps << "\n";
  out << "chi=" << num(o.chi) << "\n";
  if (o.evidence) {
    out << "trigger=" << o.evidence->trigger << "\n";
    out << "sup_growth=" << num(o.evidence->sup_growth) << "\n";
  }
  out << "max_mass_drift=" << num(o.max_mass_drift) << "\n";
  if (!o.message.empty()) out << "message=" << o.message << "\n";
  switch (o.status) {
    case RunStatus::CompletedToTEnd: return kOk;
    case RunStatus::NumericalBlowup: return kBlowup;
    case RunStatus::Aborted: break;
  }
  return kFailure;
}

int verify(const std::string& suite, std::ostream& out) {
  const auto reports = run_suites(suite);
  bool all = true;
  for (const auto& r : reports) {
    std::size_t passed = 0;
    for (const auto& c : r.cases) {
      out << r.suite << " " << c.name << " " << (c.pass ? "PASS" : "FAIL") << " margin=" << num(c.margin) << " "
          << c.detail << "\n";
      passed += c.pass;
    }
    out << r.suite << ": " << passed << "/" << r.cases.size() << " passed\n";
    all = all && r.pass();
  }
  out << "result=" << (all ? "PASS" : "FAIL") << "\n";
  return all ? kOk : kFailure;
}

int calibrate(std::ostream& out) {
  const CnCalibration c = calibrate_cn();
  for (const auto& s : c.samples) out << s.name << " ratio=" << num(s.margin) << "\n";
  out << "c_n=" << num(c.c_n) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keller-Segel tensorial flux toolkit", "kst"};
  app.require_subcommand(1);

  MatrixSource check_src;
  auto* check = app.add_subcommand("check-matrix", "Polar factors, canonical spectrum and hypothesis verdict");
  check_src.add_to(check);

  ThresholdArgs th;
  auto* thr = app.add_subcommand("thresholds", "Blow-up admissibility report");
  th.matrix.add_to(thr);
  thr->add_option("--chi", th.chi, "Chemotactic sensitivity (> 0)")->required();
  thr->add_option("--dim", th.dim, "Space dimension (matches the matrix size; identity matrix when none given)");
  thr->add_option("--mass", th.mass, "Total mass M")->required();
  thr->add_option("--moment", th.moment, "Second moment m0")->required();

  std::string config_path, output_dir;
  auto* sim = app.add_subcommand("simulate", "Run a simulation from a config file");
  sim->add_option("config", config_path, "Config file")->required();
  sim->add_option("--output-dir", output_dir, "Overrides output_dir from the config");

  std::string suite;
  auto* ver = app.add_subcommand("verify", "Run a property suite");
  ver->add_option("suite", suite, "potential-oracle | biler | gradv-bound | moment-identity | all")->required();

  auto* cal = app.add_subcommand("calibrate-cn", "Estimate the L^{3/2} compatibility constant");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (check->parsed()) return check_matrix(check_src, out);
    if (thr->parsed()) return thresholds(th, out);
    if (sim->parsed()) return simulate(config_path, output_dir, out);
    if (ver->parsed()) return verify(suite, out);
    if (cal->parsed()) return calibrate(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace kst::cli
