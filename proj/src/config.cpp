#include "kst/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "kst/error.hpp"

namespace kst {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x)) {
    throw Error(ErrorCode::ConfigInvalid, key + ": not a finite number: '" + v + "'");
  }
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw Error(ErrorCode::ConfigInvalid, key + ": not an integer");
  return static_cast<int>(x);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::string buf = v;
  std::replace(buf.begin(), buf.end(), ',', ' ');
  std::istringstream in(buf);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double(key, tok));
  return out;
}

std::array<double, 3> to_vec3(const std::string& key, const std::string& v, bool allow_scalar) {
  const auto l = to_list(key, v);
  if (allow_scalar && l.size() == 1) return {l[0], l[0], l[0]};
  if (l.size() != 3) throw Error(ErrorCode::ConfigInvalid, key + ": expected 3 values");
  return {l[0], l[1], l[2]};
}

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); };
  if (a.rows() != 3 || a.cols() != 3) fail("simulation needs a 3x3 flux matrix");
  if (!(chi >= 0.0)) fail("chi must be >= 0");
  if (chi_admissibility_ratio && !(*chi_admissibility_ratio > 0.0 && *chi_admissibility_ratio <= 1.0)) {
    fail("chi_admissibility_ratio must lie in (0, 1]");
  }
  if (n_cells < 16 || (n_cells & (n_cells - 1)) != 0) fail("n_cells must be a power of two >= 16");
  if (!(half_width > 0.0)) fail("half_width must be positive");
  if (!(initial.mass > 0.0)) fail("mass must be positive");
  if (initial.kind == InitialData::Kind::Gaussian) {
    for (double s : initial.sigma)
      if (!(s > 0.0)) fail("sigma must be positive");
  }
  if (initial.kind == InitialData::Kind::Ball && !(initial.radius > 0.0)) fail("radius must be positive");
  if (initial.kind == InitialData::Kind::File && initial.file.empty()) fail("initial = file needs initial_file");
  if (initial.kind == InitialData::Kind::File && epsilon) fail("epsilon applies to analytic initial data only");
  if (initial.orientation.rows() != 3 || initial.orientation.cols() != 3) fail("orientation must be 3x3");
  if (epsilon && !(*epsilon > 0.0)) fail("epsilon must be positive");
  if (!(t_end > 0.0)) fail("t_end must be positive");
  if (!(cfl > 0.0 && cfl < 1.0)) fail("cfl must lie in (0, 1)");
  if (!(dt_max > 0.0)) fail("dt_max must be positive");
  if (!(dt_min > 0.0 && dt_min < dt_max)) fail("dt_min must satisfy 0 < dt_min < dt_max");
  if (!(blowup_factor > 1.0)) fail("blowup_factor must exceed 1");
  if (diag_every < 1) fail("diag_every must be >= 1");
  for (double s : snapshot_times)
    if (!(s >= 0.0)) fail("snapshot_times must be >= 0");
}

SimConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  SimConfig c;
  auto resolve = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };

  bool have_matrix = false;
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> handlers = {
      {"matrix",
       [&](const std::string& k, const std::string& v) {
         if (have_matrix) throw Error(ErrorCode::ConfigInvalid, "matrix given twice");
         try {
           c.a = parse_matrix_list(v);
         } catch (const Error& e) {
           throw Error(ErrorCode::ConfigInvalid, k + ": " + e.what());
         }
         have_matrix = true;
       }},
      {"matrix_file",
       [&](const std::string& k, const std::string& v) {
         if (have_matrix) throw Error(ErrorCode::ConfigInvalid, "matrix given twice");
         try {
           c.a = read_matrix_file(resolve(v));
         } catch (const Error& e) {
           throw Error(ErrorCode::ConfigInvalid, k + ": " + e.what());
         }
         have_matrix = true;
       }},
      {"chi", [&](const std::string& k, const std::string& v) { c.chi = to_double(k, v); }},
      {"chi_admissibility_ratio",
       [&](const std::string& k, const std::string& v) { c.chi_admissibility_ratio = to_double(k, v); }},
      {"n_cells", [&](const std::string& k, const std::string& v) { c.n_cells = to_int(k, v); }},
      {"half_width", [&](const std::string& k, const std::string& v) { c.half_width = to_double(k, v); }},
      {"initial",
       [&](const std::string& k, const std::string& v) {
         if (v == "gaussian") c.initial.kind = InitialData::Kind::Gaussian;
         else if (v == "ball") c.initial.kind = InitialData::Kind::Ball;
         else if (v == "file") c.initial.kind = InitialData::Kind::File;
         else throw Error(ErrorCode::ConfigInvalid, k + ": expected gaussian, ball or file");
       }},
      {"mass", [&](const std::string& k, const std::string& v) { c.initial.mass = to_double(k, v); }},
      {"sigma", [&](const std::string& k, const std::string& v) { c.initial.sigma = to_vec3(k, v, true); }},
      {"center", [&](const std::string& k, const std::string& v) { c.initial.center = to_vec3(k, v, false); }},
      {"radius", [&](const std::string& k, const std::string& v) { c.initial.radius = to_double(k, v); }},
      {"orientation",
       [&](const std::string& k, const std::string& v) {
         const auto l = to_list(k, v);
         if (l.size() != 9) throw Error(ErrorCode::ConfigInvalid, k + ": expected 9 values");
         for (int i = 0; i < 3; ++i)
           for (int j = 0; j < 3; ++j) c.initial.orientation(i, j) = l[3 * i + j];
       }},
      {"initial_file", [&](const std::string&, const std::string& v) { c.initial.file = resolve(v); }},
      {"epsilon", [&](const std::string& k, const std::string& v) { c.epsilon = to_double(k, v); }},
      {"t_end", [&](const std::string& k, const std::string& v) { c.t_end = to_double(k, v); }},
      {"cfl", [&](const std::string& k, const std::string& v) { c.cfl = to_double(k, v); }},
      {"dt_max", [&](const std::string& k, const std::string& v) { c.dt_max = to_double(k, v); }},
      {"dt_min", [&](const std::string& k, const std::string& v) { c.dt_min = to_double(k, v); }},
      {"blowup_factor", [&](const std::string& k, const std::string& v) { c.blowup_factor = to_double(k, v); }},
      {"diag_every", [&](const std::string& k, const std::string& v) { c.diag_every = to_int(k, v); }},
      {"output_dir", [&](const std::string&, const std::string& v) { c.output_dir = v; }},
      {"snapshot_times",
       [&](const std::string& k, const std::string& v) {
         c.snapshot_times = to_list(k, v);
         std::sort(c.snapshot_times.begin(), c.snapshot_times.end());
       }},
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigInvalid, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = handlers.find(key);
    if (it == handlers.end()) {
      throw Error(ErrorCode::ConfigInvalid, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(key, value);
  }
  c.validate();
  return c;
}

SimConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace kst
