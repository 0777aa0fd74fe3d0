#include "geocbf/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "geocbf/double_integrator.hpp"
#include "geocbf/errors.hpp"
#include "geocbf/satellite.hpp"
#include "geocbf/so3.hpp"

namespace geocbf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string normalize_key(std::string_view key) {
  std::string out = trim(key);
  for (char& c : out) {
    if (c == '-') c = '_';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

double parse_number(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + t + "'");
  return value;
}

Eigen::Vector3d parse_vector3(std::string_view key, std::string_view text) {
  std::string t(text);
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream is(t);
  std::vector<double> values;
  std::string token;
  while (is >> token) values.push_back(parse_number(key, token));
  if (values.size() != 3)
    throw ConfigError("'" + std::string(key) + "' needs 3 components");
  return {values[0], values[1], values[2]};
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_vec(const Eigen::Vector3d& v) {
  return fmt17(v.x()) + "," + fmt17(v.y()) + "," + fmt17(v.z());
}

}  // namespace

FilterMode parse_filter_mode(std::string_view name) {
  const std::string n = normalize_key(name);
  if (n == "none") return FilterMode::None;
  if (n == "qp") return FilterMode::Qp;
  if (n == "hs") return FilterMode::Hs;
  throw ConfigError("unknown filter '" + n + "' (expected none, qp or hs)");
}

std::string_view to_string(FilterMode mode) {
  switch (mode) {
    case FilterMode::None: return "none";
    case FilterMode::Qp: return "qp";
    case FilterMode::Hs: return "hs";
  }
  return "none";
}

std::string_view to_string(SystemKind kind) {
  return kind == SystemKind::Satellite ? "satellite" : "euclidean-double-integrator";
}

double ScenarioConfig::effective_reference_polar() const {
  return reference_polar.value_or(theta_safe + 0.5);
}

void ScenarioConfig::set(std::string_view raw_key, std::string_view raw_value) {
  const std::string key = normalize_key(raw_key);
  const std::string value = trim(raw_value);
  auto num = [&] { return parse_number(key, value); };
  auto vec = [&] { return parse_vector3(key, value); };

  if (key == "system") {
    const std::string v = normalize_key(value);
    if (v == "satellite") system = SystemKind::Satellite;
    else if (v == "euclidean_double_integrator") system = SystemKind::EuclideanDoubleIntegrator;
    else throw ConfigError("unknown system '" + value + "'");
  } else if (key == "inertia") inertia = vec();
  else if (key == "theta_safe") theta_safe = num();
  else if (key == "initial.attitude") initial_attitude = vec();
  else if (key == "initial.omega") initial_omega = vec();
  else if (key == "reference.polar") reference_polar = num();
  else if (key == "reference.azimuth") reference_azimuth = num();
  else if (key == "mass") mass = num();
  else if (key == "initial.position") initial_position = vec();
  else if (key == "initial.velocity") initial_velocity = vec();
  else if (key == "goal") goal = vec();
  else if (key == "obstacle.center") obstacle_center = vec();
  else if (key == "obstacle.radius") obstacle_radius = num();
  else if (key == "gravity") gravity = vec();
  else if (key == "epsilon") epsilon = num();
  else if (key == "delta") delta = num();
  else if (key == "alpha.kind") {
    try {
      alpha.kind = parse_alpha_kind(normalize_key(value));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "alpha.gain") alpha.gain = num();
  else if (key == "domain_margin") domain_margin = num();
  else if (key == "filter") filter = parse_filter_mode(value);
  else if (key == "cost") {
    const std::string v = normalize_key(value);
    if (v == "dual") cost = ForceCostNorm::DualMetric;
    else if (v == "euclidean") cost = ForceCostNorm::EuclideanCoefficients;
    else throw ConfigError("unknown cost '" + value + "' (expected dual or euclidean)");
  } else if (key == "sampling") {
    const std::string v = normalize_key(value);
    if (v == "stage") sampling = ControllerSampling::Stage;
    else if (v == "zoh") sampling = ControllerSampling::ZeroOrderHold;
    else throw ConfigError("unknown sampling '" + value + "' (expected stage or zoh)");
  } else if (key == "gains.kp") kp = num();
  else if (key == "gains.kd") kd = num();
  else if (key == "dt") dt = num();
  else if (key == "t" || key == "horizon") T = num();
  else if (key == "seed") {
    const double s = num();
    if (s < 0 || s != std::floor(s)) throw ConfigError("seed must be a nonnegative integer");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "output_dir") output_dir = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(epsilon > 0.0, "epsilon must be positive");
  require(delta > 0.0, "delta must be positive");
  require(alpha.gain > 0.0, "alpha.gain must be positive");
  require(domain_margin > 0.0, "domain_margin must be positive");
  require(kp > 0.0 && kd > 0.0, "gains must be positive");
  require(dt > 0.0 && T > 0.0 && dt <= T, "need 0 < dt <= T");
  require(std::isfinite(dt) && std::isfinite(T), "dt and T must be finite");
  if (system == SystemKind::Satellite) {
    require((inertia.array() > 0.0).all(), "inertia must be positive");
    require(inertia.x() == inertia.y(), "satellite requires J1 == J2");
    require(theta_safe > 0.0 && theta_safe < std::numbers::pi, "theta_safe must lie in (0, pi)");
    require(initial_attitude.allFinite() && initial_omega.allFinite(),
            "initial state must be finite");
  } else {
    require(mass > 0.0, "mass must be positive");
    require(obstacle_radius > 0.0, "obstacle.radius must be positive");
    require(initial_position.allFinite() && initial_velocity.allFinite(),
            "initial state must be finite");
  }
}

std::string ScenarioConfig::canonical() const {
  std::ostringstream os;
  os << "system=" << to_string(system) << '\n'
     << "inertia=" << fmt_vec(inertia) << '\n'
     << "theta_safe=" << fmt17(theta_safe) << '\n'
     << "initial.attitude=" << fmt_vec(initial_attitude) << '\n'
     << "initial.omega=" << fmt_vec(initial_omega) << '\n'
     << "reference.polar=" << fmt17(effective_reference_polar()) << '\n'
     << "reference.azimuth=" << fmt17(reference_azimuth) << '\n'
     << "mass=" << fmt17(mass) << '\n'
     << "initial.position=" << fmt_vec(initial_position) << '\n'
     << "initial.velocity=" << fmt_vec(initial_velocity) << '\n'
     << "goal=" << fmt_vec(goal) << '\n'
     << "obstacle.center=" << fmt_vec(obstacle_center) << '\n'
     << "obstacle.radius=" << fmt17(obstacle_radius) << '\n'
     << "gravity=" << fmt_vec(gravity) << '\n'
     << "epsilon=" << fmt17(epsilon) << '\n'
     << "delta=" << fmt17(delta) << '\n'
     << "alpha.kind=" << to_string(alpha.kind) << '\n'
     << "alpha.gain=" << fmt17(alpha.gain) << '\n'
     << "domain_margin=" << fmt17(domain_margin) << '\n'
     << "filter=" << to_string(filter) << '\n'
     << "cost=" << (cost == ForceCostNorm::DualMetric ? "dual" : "euclidean") << '\n'
     << "sampling=" << (sampling == ControllerSampling::Stage ? "stage" : "zoh") << '\n'
     << "gains.kp=" << fmt17(kp) << '\n'
     << "gains.kd=" << fmt17(kd) << '\n'
     << "dt=" << fmt17(dt) << '\n'
     << "T=" << fmt17(T) << '\n'
     << "seed=" << seed << '\n';
  return os.str();
}

std::string ScenarioConfig::hash() const {
  // FNV-1a, stable across runs and platforms.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig config;
  std::istringstream is{std::string(text)};
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = normalize_key(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = normalize_key(std::string_view(t).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    try {
      config.set(key, std::string_view(t).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["min_h"] = r.min_h;
  j["min_h0"] = r.min_h0;
  j["constraint_active_fraction"] = r.constraint_active_fraction;
  j["max_torque_norm"] = r.max_torque_norm;
  j["divergence_flag"] = r.divergence_flag;
  j["divergence_time"] = r.divergence_time ? nlohmann::ordered_json(*r.divergence_time)
                                           : nlohmann::ordered_json(nullptr);
  j["wall_time"] = r.wall_time;
  j["worst_step_h_decrease"] = r.worst_step_h_decrease;
  j["samples"] = r.samples;
  j["system"] = r.system;
  j["filter"] = r.filter;
  j["scenario_hash"] = r.scenario_hash;
  return j.dump(2) + "\n";
}

namespace {

struct BuiltSystem {
  SMCS smcs;
  BacksteppingCBF cbf;
  std::function<Eigen::VectorXd(const MechState&)> nominal;
  MechState initial;
};

BuiltSystem build_system(const ScenarioConfig& c) {
  if (c.system == SystemKind::Satellite) {
    satellite::SatelliteParams p;
    p.inertia = c.inertia;
    p.theta_safe = c.theta_safe;
    p.epsilon = c.epsilon;
    p.delta = c.delta;
    p.alpha = c.alpha;
    p.kp = c.kp;
    p.kd = c.kd;
    p.reference =
        satellite::SatelliteParams::direction(c.effective_reference_polar(), c.reference_azimuth);
    auto sys = satellite::satellite_smcs(p);
    BacksteppingCBF cbf = BacksteppingCBF::make(
        sys.manifold, satellite::heat_shield_constraint(p.theta_safe), p.epsilon, p.alpha,
        p.delta, c.domain_margin);
    MechState x0{Eigen::MatrixXd(so3::exp(c.initial_attitude)), c.initial_omega};
    return {std::move(sys.smcs), std::move(cbf),
            [p](const MechState& st) { return Eigen::VectorXd(satellite::nominal_pd(p, st)); },
            std::move(x0)};
  }
  double_integrator::DoubleIntegratorParams p;
  p.mass = c.mass;
  p.gravity = c.gravity;
  p.obstacle_center = c.obstacle_center;
  p.obstacle_radius = c.obstacle_radius;
  p.goal = c.goal;
  p.epsilon = c.epsilon;
  p.delta = c.delta;
  p.alpha = c.alpha;
  p.kp = c.kp;
  p.kd = c.kd;
  auto sys = double_integrator::double_integrator_smcs(p);
  BacksteppingCBF cbf = BacksteppingCBF::make(
      sys.manifold, double_integrator::obstacle_constraint(p.obstacle_center, p.obstacle_radius),
      p.epsilon, p.alpha, p.delta, c.domain_margin);
  MechState x0{Eigen::MatrixXd(c.initial_position), c.initial_velocity};
  return {std::move(sys.smcs), std::move(cbf),
          [p](const MechState& st) { return Eigen::VectorXd(double_integrator::nominal_pd(p, st)); },
          std::move(x0)};
}

double finite_min(double a, double b) {
  if (std::isnan(b)) return a;
  if (std::isnan(a)) return b;
  return std::min(a, b);
}

}  // namespace

RunReport summarize(const Trajectory& traj, const ScenarioConfig& config,
                    double wall_time) {
  RunReport r;
  r.min_h = kNaN;
  r.min_h0 = kNaN;
  std::size_t active = 0;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const TrajectorySample& s = traj.samples[k];
    // h is undefined outside the barrier domain; h0 bounds it from above.
    r.min_h = finite_min(r.min_h, std::isfinite(s.h) ? s.h : s.h0);
    r.min_h0 = finite_min(r.min_h0, s.h0);
    if (s.filter_active) ++active;
    r.max_torque_norm = std::max(r.max_torque_norm, s.tau.norm());
    if (k > 0 && std::isfinite(s.h) && std::isfinite(traj.samples[k - 1].h))
      r.worst_step_h_decrease =
          std::max(r.worst_step_h_decrease, traj.samples[k - 1].h - s.h);
  }
  r.samples = traj.samples.size();
  r.constraint_active_fraction =
      r.samples ? static_cast<double>(active) / static_cast<double>(r.samples) : 0.0;
  r.divergence_flag = traj.divergence_time.has_value();
  r.divergence_time = traj.divergence_time;
  r.wall_time = wall_time;
  r.system = std::string(to_string(config.system));
  r.filter = std::string(to_string(config.filter));
  r.scenario_hash = traj.meta.scenario_hash;
  return r;
}

RunResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  BuiltSystem sys = build_system(config);
  const SMCS& smcs = sys.smcs;
  const BacksteppingCBF& cbf = sys.cbf;
  const bool filtered = config.filter != FilterMode::None;
  const FilterKind kind = config.filter == FilterMode::Hs ? FilterKind::HalfSontag : FilterKind::Qp;
  const ForceCostNorm cost = config.cost;
  const auto& nominal = sys.nominal;

  ForceLaw controller;
  if (filtered) {
    controller = [&](const MechState& st) {
      return safe_force_coefficients(cbf, smcs, st, nominal(st), kind, cost).coefficients;
    };
  } else {
    controller = nominal;
  }

  Observer observer = [&](const MechState& st, const Eigen::VectorXd& tau) {
    ObserverValues o;
    o.h0 = cbf.h0.value(st.q);
    if (filtered) {
      const SafeForceResult r = safe_force_coefficients(cbf, smcs, st, nominal(st), kind, cost);
      o.h = r.h;
      o.hdot_margin = r.margin;
      o.filter_active = r.filter.active;
      return o;
    }
    o.h = kNaN;
    o.hdot_margin = kNaN;
    try {
      o.h = backstepping_h(cbf, smcs, st);
      const HdotTerms t = hdot_terms(cbf, smcs, st);
      o.hdot_margin = t.drift + force_from_coefficients(smcs, st.q, tau).dot(t.force_gain) +
                      alpha_eval(cbf.alpha, o.h);
    } catch (const OutsideDomain&) {
      // Unfiltered runs may leave D0; the diagnostics are undefined there.
    }
    return o;
  };

  RunResult result;
  result.trajectory = simulate(smcs, controller, sys.initial, config.dt, config.T, observer,
                               config.sampling, config.hash());
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report = summarize(result.trajectory, config, wall);
  return result;
}

std::vector<std::string> trajectory_csv_columns(const Trajectory& traj) {
  std::vector<std::string> cols{"t"};
  if (traj.samples.empty()) return cols;
  const TrajectorySample& s0 = traj.samples.front();
  if (s0.q.rows() == 3 && s0.q.cols() == 3) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cols.push_back("qw" + std::to_string(i) + std::to_string(j));
  } else {
    for (Eigen::Index i = 0; i < s0.q.size(); ++i) cols.push_back("x" + std::to_string(i));
  }
  for (Eigen::Index i = 0; i < s0.v.size(); ++i) cols.push_back("v" + std::to_string(i));
  for (Eigen::Index i = 0; i < s0.tau.size(); ++i) cols.push_back("tau" + std::to_string(i));
  cols.insert(cols.end(), {"h", "h0", "hdot_margin"});
  return cols;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const auto cols = trajectory_csv_columns(traj);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  std::string row;
  for (const TrajectorySample& s : traj.samples) {
    row = fmt17(s.t);
    const bool rotation = s.q.rows() == 3 && s.q.cols() == 3;
    if (rotation) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) row += "," + fmt17(s.q(i, j));
    } else {
      for (Eigen::Index i = 0; i < s.q.size(); ++i) row += "," + fmt17(s.q(i));
    }
    for (Eigen::Index i = 0; i < s.v.size(); ++i) row += "," + fmt17(s.v(i));
    for (Eigen::Index i = 0; i < s.tau.size(); ++i) row += "," + fmt17(s.tau(i));
    row += "," + fmt17(s.h) + "," + fmt17(s.h0) + "," + fmt17(s.hdot_margin);
    os << row << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty trajectory csv");
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(trim(c));
  }
  int nq = 0, nx = 0, nv = 0, ntau = 0;
  for (const auto& c : cols) {
    if (c.rfind("tau", 0) == 0) ++ntau;
    else if (c.size() == 4 && c.rfind("qw", 0) == 0) ++nq;
    else if (c[0] == 'x') ++nx;
    else if (c[0] == 'v') ++nv;
  }
  const bool rotation = nq == 9;
  if (cols.empty() || cols.front() != "t" || (nq != 0 && nq != 9) || (nq == 0) == (nx == 0))
    throw std::invalid_argument("unrecognized trajectory csv header");
  const std::size_t expected = 1 + (rotation ? 9 : nx) + nv + ntau + 3;
  if (cols.size() != expected || cols[expected - 3] != "h" || cols[expected - 2] != "h0" ||
      cols[expected - 1] != "hdot_margin")
    throw std::invalid_argument("unrecognized trajectory csv header");

  Trajectory traj;
  std::vector<double> vals;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    vals.clear();
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      vals.push_back(std::strtod(p, &end));
      if (end == p) throw std::invalid_argument("malformed csv value");
      p = end;
      if (*p == ',') ++p;
      else break;
    }
    if (vals.size() != expected) throw std::invalid_argument("csv row has wrong width");
    TrajectorySample s;
    std::size_t k = 0;
    s.t = vals[k++];
    if (rotation) {
      s.q.resize(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s.q(i, j) = vals[k++];
    } else {
      s.q.resize(nx, 1);
      for (int i = 0; i < nx; ++i) s.q(i) = vals[k++];
    }
    s.v.resize(nv);
    for (int i = 0; i < nv; ++i) s.v(i) = vals[k++];
    s.tau.resize(ntau);
    for (int i = 0; i < ntau; ++i) s.tau(i) = vals[k++];
    s.h = vals[k++];
    s.h0 = vals[k++];
    s.hdot_margin = vals[k++];
    traj.samples.push_back(std::move(s));
  }
  if (traj.samples.size() >= 2) traj.meta.dt = traj.samples[1].t - traj.samples[0].t;
  return traj;
}

namespace {

std::string svg_header(int w, int h) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return os.str();
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const char* color,
                     const char* extra = "") {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << "<polyline fill=\"none\" stroke=\"" << color
     << "\" stroke-width=\"1.5\" " << extra << " points=\"";
  for (const auto& [x, y] : pts) os << x << ',' << y << ' ';
  os << "\"/>\n";
  return os.str();
}

std::size_t plot_stride(std::size_t n) { return std::max<std::size_t>(1, n / 2000); }

}  // namespace

std::string render_h_plot_svg(const Trajectory& traj) {
  constexpr int W = 720, H = 400, L = 60, R = 20, T = 20, B = 40;
  std::ostringstream os;
  os << svg_header(W, H);
  if (traj.samples.empty()) return os.str() + "</svg>\n";
  double tmax = traj.samples.back().t, lo = 0.0, hi = 0.0;
  for (const auto& s : traj.samples) {
    if (std::isfinite(s.h)) lo = std::min(lo, s.h), hi = std::max(hi, s.h);
    if (std::isfinite(s.h0)) lo = std::min(lo, s.h0), hi = std::max(hi, s.h0);
  }
  if (tmax <= 0.0) tmax = 1.0;
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto X = [&](double t) { return L + (W - L - R) * t / tmax; };
  auto Y = [&](double v) { return T + (H - T - B) * (hi - v) / (hi - lo); };
  std::vector<std::pair<double, double>> ph, ph0;
  const std::size_t stride = plot_stride(traj.samples.size());
  for (std::size_t k = 0; k < traj.samples.size(); k += stride) {
    const auto& s = traj.samples[k];
    if (std::isfinite(s.h)) ph.emplace_back(X(s.t), Y(s.h));
    if (std::isfinite(s.h0)) ph0.emplace_back(X(s.t), Y(s.h0));
  }
  os << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << Y(0.0) << "\" y2=\"" << Y(0.0)
     << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n"
     << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
     << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n"
     << polyline(ph0, "#1f77b4") << polyline(ph, "#d62728")
     << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 << "\" fill=\"#1f77b4\">h0</text>\n"
     << "<text x=\"" << L + 40 << "\" y=\"" << T + 16 << "\" fill=\"#d62728\">h</text>\n"
     << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\">t [s] (0 to " << tmax
     << ")</text>\n"
     << "<text x=\"5\" y=\"" << T + 12 << "\">" << hi << "</text>\n"
     << "<text x=\"5\" y=\"" << H - B << "\">" << lo << "</text>\n</svg>\n";
  return os.str();
}

std::string render_sphere_svg(const Trajectory& traj, double theta_safe) {
  constexpr int S = 420;
  constexpr double C = S / 2.0, Rad = 180.0;
  std::ostringstream os;
  os << svg_header(S, S);
  os << "<circle cx=\"" << C << "\" cy=\"" << C << "\" r=\"" << Rad
     << "\" fill=\"#f4f4f4\" stroke=\"black\"/>\n";
  if (theta_safe < std::numbers::pi / 2)
    os << "<circle cx=\"" << C << "\" cy=\"" << C << "\" r=\"" << Rad * std::sin(theta_safe)
       << "\" fill=\"#e6f4e6\" stroke=\"green\" stroke-dasharray=\"5 3\"/>\n";
  std::vector<std::pair<double, double>> upper, lower;
  const std::size_t stride = plot_stride(traj.samples.size());
  for (std::size_t k = 0; k < traj.samples.size(); k += stride) {
    const auto& q = traj.samples[k].q;
    if (q.rows() != 3 || q.cols() != 3) continue;
    const double x = q(0, 2), y = q(1, 2), z = q(2, 2);
    (z >= 0 ? upper : lower).emplace_back(C + Rad * x, C - Rad * y);
  }
  os << polyline(upper, "#d62728") << polyline(lower, "#d62728", "stroke-dasharray=\"2 2\"")
     << "<text x=\"8\" y=\"18\">R e3 seen from +z; dashed circle: safe cone</text>\n</svg>\n";
  return os.str();
}

std::string render_path_svg(const Trajectory& traj, const Eigen::Vector3d& center,
                            double radius) {
  constexpr int S = 480, M = 30;
  double xmin = center.x() - radius, xmax = center.x() + radius;
  double ymin = center.y() - radius, ymax = center.y() + radius;
  for (const auto& s : traj.samples) {
    if (s.q.size() < 2) continue;
    xmin = std::min(xmin, s.q(0)), xmax = std::max(xmax, s.q(0));
    ymin = std::min(ymin, s.q(1)), ymax = std::max(ymax, s.q(1));
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
  const double scale = (S - 2 * M) / span;
  auto X = [&](double x) { return M + (x - xmin) * scale; };
  auto Y = [&](double y) { return S - M - (y - ymin) * scale; };
  std::ostringstream os;
  os << svg_header(S, S) << "<circle cx=\"" << X(center.x()) << "\" cy=\"" << Y(center.y())
     << "\" r=\"" << radius * scale << "\" fill=\"#f8d7d7\" stroke=\"#a00\"/>\n";
  std::vector<std::pair<double, double>> pts;
  const std::size_t stride = plot_stride(traj.samples.size());
  for (std::size_t k = 0; k < traj.samples.size(); k += stride)
    if (traj.samples[k].q.size() >= 2)
      pts.emplace_back(X(traj.samples[k].q(0)), Y(traj.samples[k].q(1)));
  os << polyline(pts, "#1f77b4") << "<text x=\"8\" y=\"18\">xy path and obstacle</text>\n</svg>\n";
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_run_outputs(const RunResult& result, const ScenarioConfig& config,
                       const std::filesystem::path& dir, const OutputOptions& opts) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "report.json", report_to_json(result.report));
  if (opts.csv) {
    std::ostringstream os;
    write_trajectory_csv(os, result.trajectory);
    write_file_atomic(dir / "trajectory.csv", os.str());
  }
  if (opts.svg) {
    write_file_atomic(dir / "h_plot.svg", render_h_plot_svg(result.trajectory));
    if (config.system == SystemKind::Satellite)
      write_file_atomic(dir / "sphere.svg", render_sphere_svg(result.trajectory, config.theta_safe));
    else
      write_file_atomic(dir / "path.svg", render_path_svg(result.trajectory, config.obstacle_center,
                                                          config.obstacle_radius));
  }
}

std::filesystem::path resolve_output_dir(const std::optional<std::string>& explicit_dir,
                                         const ScenarioConfig& config) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* env = std::getenv("GEOCBF_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

void apply_sweep_value(ScenarioConfig& config, std::string_view param, double value) {
  const std::string p = normalize_key(param);
  if (p == "epsilon") config.epsilon = value;
  else if (p == "delta") config.delta = value;
  else if (p == "alpha_gain") config.alpha.gain = value;
  else if (p == "theta_safe") config.theta_safe = value;
  else
    throw ConfigError("unknown sweep parameter '" + std::string(param) +
                      "' (expected epsilon, delta, alpha-gain or theta-safe)");
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& base, std::string_view param,
                                const std::vector<double>& values,
                                const std::optional<std::filesystem::path>& out_dir,
                                const OutputOptions& opts) {
  std::vector<ScenarioConfig> configs;
  for (double v : values) {
    ScenarioConfig c = base;
    apply_sweep_value(c, param, v);
    c.validate();
    configs.push_back(std::move(c));
  }
  const std::string pname(param);
  std::vector<std::future<SweepRow>> jobs;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      SweepRow row;
      row.value = values[i];
      try {
        RunResult r = run_scenario(configs[i]);
        if (out_dir) write_run_outputs(r, configs[i], *out_dir / (pname + "=" + fmt17(values[i])), opts);
        row.report = r.report;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      return row;
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

std::string sweep_summary_csv(const std::vector<SweepRow>& rows) {
  std::string out = "value,min_h0,max_torque_norm\n";
  for (const auto& r : rows) {
    out += fmt17(r.value) + "," + fmt17(r.report ? r.report->min_h0 : kNaN) + "," +
           fmt17(r.report ? r.report->max_torque_norm : kNaN) + "\n";
  }
  return out;
}

}  // namespace geocbf
