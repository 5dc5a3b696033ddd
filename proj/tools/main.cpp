// rubberroll: command-line front end over the C interface.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rubberroll/rubberroll.h"

namespace {

enum Exit { kOk = 0, kInvalid = 1, kNumerical = 2, kVerifyFailed = 3 };

// Thrown to leave main with a specific exit code after the message is logged.
struct ExitWith {
  int code;
};

struct Common {
  std::optional<double> alpha, beta, nu, eta;
  std::string b_sign;
  std::optional<double> tol_abs, tol_rel;
  std::optional<long> max_steps;
  unsigned jobs = 1;
  std::string out = "-";
  std::string config;
};

[[noreturn]] void invalid(const std::string& msg) {
  spdlog::error("{}", msg);
  throw ExitWith{kInvalid};
}

void check(rr_status s) {
  if (s == RR_OK) return;
  spdlog::error("{}: {}", rr_status_string(s), rr_last_error());
  const bool numerical = s == RR_ERR_NUMERICAL || s == RR_ERR_INTERNAL;
  throw ExitWith{numerical ? kNumerical : kInvalid};
}

struct Model {
  rr_model* m = nullptr;
  ~Model() { rr_model_destroy(m); }
};

struct Buffer {
  rr_buffer* b = nullptr;
  ~Buffer() { rr_buffer_destroy(b); }
  std::string_view text() const { return {rr_buffer_data(b), rr_buffer_size(b)}; }
};

void emit(const std::string& path, std::string_view text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) invalid("cannot open output file '" + path + "'");
  f << text;
  if (!f) invalid("failed writing '" + path + "'");
}

// "start:stop:count", inclusive, count >= 1.
std::vector<double> parse_range(const std::string& range) {
  std::vector<std::string> parts;
  std::stringstream ss(range);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) invalid("range '" + range + "' must look like start:stop:count");
  try {
    const double a = std::stod(parts[0]), b = std::stod(parts[1]);
    const long n = std::stol(parts[2]);
    if (n < 1) invalid("range '" + range + "' needs count >= 1");
    std::vector<double> v;
    for (long i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1));
    return v;
  } catch (const std::logic_error&) {
    invalid("range '" + range + "' is not numeric");
  }
}

// Key-value file: one "key = value" per line, '#' starts a comment. Keys
// mirror the long flag names with '-' or '_'.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) invalid("cannot read config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) invalid(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    for (char& c : key)
      if (c == '_') c = '-';
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    kv[key] = value;
  }
  return kv;
}

// Flags win: a config value only fills options not given on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
  for (const auto& [key, value] : read_config(path)) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) invalid("config key '" + key + "' is not an option of '" + sub->get_name() + "'");
    if (key == "config") continue;
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      invalid("config key '" + key + "': " + e.what());
    }
  }
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--alpha", c.alpha, "center-of-mass offset a/b3, in [0, 1]");
  sub->add_option("--beta", c.beta, "aspect ratio b1/b3, > 0");
  sub->add_option("--nu", c.nu, "inertia ratio i3/i1, in (0, 2]");
  sub->add_option("--eta", c.eta, "m b3^2 / i1, > 0");
  sub->add_option("--b-sign,--b_sign", c.b_sign, "cross term of B(theta): derived or paper");
  sub->add_option("--tol-abs,--tol_abs", c.tol_abs, "absolute integration tolerance");
  sub->add_option("--tol-rel,--tol_rel", c.tol_rel, "relative integration tolerance");
  sub->add_option("--max-steps,--max_steps", c.max_steps, "step limit per integration");
  sub->add_option("--jobs", c.jobs, "worker threads for grid commands")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "output file ('-' for standard output)");
  sub->add_option("--config", c.config, "key=value file; flags win over its entries");
}

// Parameters are required except for `verify`, which has a default body.
void make_model(const Common& c, const CLI::App* sub, bool defaults_allowed, Model& m) {
  rr_params p;
  rr_params_init(&p);
  const std::pair<const char*, const std::optional<double>*> need[] = {
      {"alpha", &c.alpha}, {"beta", &c.beta}, {"nu", &c.nu}, {"eta", &c.eta}};
  for (const auto& [name, v] : need)
    if (!v->has_value() && !defaults_allowed) {
      std::cerr << sub->help();
      invalid(std::string("missing --") + name);
    }
  if (c.alpha) p.alpha = *c.alpha;
  if (c.beta) p.beta = *c.beta;
  if (c.nu) p.nu = *c.nu;
  if (c.eta) p.eta = *c.eta;
  if (!c.b_sign.empty()) {
    if (c.b_sign == "derived")
      p.b_sign = RR_B_SIGN_DERIVED;
    else if (c.b_sign == "paper")
      p.b_sign = RR_B_SIGN_PAPER;
    else
      invalid("--b-sign must be 'derived' or 'paper', got '" + c.b_sign + "'");
  }
  check(rr_model_create(&p, &m.m));
  rr_tolerance t;
  rr_tolerance_init(&t);
  if (c.tol_abs) t.abs = *c.tol_abs;
  if (c.tol_rel) t.rel = *c.tol_rel;
  if (c.max_steps) t.max_steps = *c.max_steps;
  check(rr_model_set_tolerance(m.m, &t));
  spdlog::debug("params alpha={} beta={} nu={} eta={} b_sign={} tol=({}, {})", p.alpha, p.beta, p.nu, p.eta,
                p.b_sign == RR_B_SIGN_PAPER ? "paper" : "derived", t.abs, t.rel);
}

std::vector<double> parse_triple(const std::string& s, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(s);
  try {
    for (std::string item; std::getline(ss, item, ',');) v.push_back(std::stod(item));
  } catch (const std::logic_error&) {
    v.clear();
  }
  if (v.size() != 3) invalid(std::string(flag) + " expects three comma-separated numbers, got '" + s + "'");
  return v;
}

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("rubberroll");
  logger->set_pattern("%l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("RUBBERROLL_LOG")) {
    const auto lvl = spdlog::level::from_str(env);
    if (lvl == spdlog::level::off && std::string(env) != "off")
      spdlog::warn("RUBBERROLL_LOG='{}' is not a level name; keeping 'warn'", env);
    else
      spdlog::set_level(lvl);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Rolling ellipsoid of revolution without slipping or spinning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rr_version()));

  Common c;

  // simulate --------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "integrate a trajectory and write the absolute-space CSV");
  sim->alias("trajectory");
  add_common(sim, c);
  std::string system = "reduced";
  std::optional<double> kappa, energy, theta0, ptheta0, tmax;
  std::string omega_s, gamma_s, eam_raw;
  double dt = 0.05;
  sim->add_option("--system", system, "reduced or full")->check(CLI::IsMember({"reduced", "full"}));
  sim->add_option("--kappa", kappa, "linear integral");
  sim->add_option("--energy", energy, "energy; sets p_theta0 from theta0");
  auto* eam = sim->add_option("--energy-above-min,--energy_above_min", eam_raw,
                              "energy eps_min + delta (delta defaults to 0.1)")
                  ->expected(0, 1);
  sim->add_option("--theta0", theta0, "initial nutation angle");
  sim->add_option("--ptheta0", ptheta0, "initial p_theta (sign only, with --energy)");
  sim->add_option("--omega", omega_s, "full system: body-frame omega as x,y,z");
  sim->add_option("--gamma", gamma_s, "full system: body-frame vertical as x,y,z");
  sim->add_option("--tmax", tmax, "end time");
  sim->add_option("--dt", dt, "output interval (<= 0: every accepted step)");

  // bifurcation -----------------------------------------------------------
  auto* bif = app.add_subcommand("bifurcation", "bifurcation diagram on the (kappa, eps) plane as JSON");
  add_common(bif, c);

  // rotation-number -------------------------------------------------------
  auto* rot = app.add_subcommand("rotation-number", "rotation number over a (kappa, eps) grid as CSV");
  add_common(rot, c);
  std::vector<double> kappas, energies;
  std::string kappa_range, energy_range;
  int branch = 0;
  rot->add_option("--kappa", kappas, "kappa values");
  rot->add_option("--energy", energies, "energy values");
  rot->add_option("--kappa-range,--kappa_range", kappa_range, "start:stop:count");
  rot->add_option("--energy-range,--energy_range", energy_range, "start:stop:count");
  rot->add_option("--theta0", theta0, "single point from (kappa, theta0, ptheta0)");
  rot->add_option("--ptheta0", ptheta0, "with --theta0");
  rot->add_option("--branch", branch, "level-set component in theta order");

  // resonance -------------------------------------------------------------
  auto* res = app.add_subcommand("resonance", "resonance curves N = -n as CSV");
  add_common(res, c);
  std::vector<int> orders{0};
  res->add_option("--order", orders, "resonance orders n");
  res->add_option("--kappa", kappas, "kappa values");
  res->add_option("--kappa-range,--kappa_range", kappa_range, "start:stop:count");
  res->add_option("--branch", branch, "level-set component in theta order");

  // classify --------------------------------------------------------------
  auto* cls = app.add_subcommand("classify", "type of the absolute-space trajectory as JSON");
  add_common(cls, c);
  double tol_rat = 0.0;
  std::optional<int> branch_opt;
  cls->add_option("--kappa", kappa, "linear integral");
  cls->add_option("--energy", energy, "energy");
  cls->add_option("--theta0", theta0, "take the energy and branch from (kappa, theta0, ptheta0)");
  cls->add_option("--ptheta0", ptheta0, "with --theta0");
  cls->add_option("--branch", branch_opt, "level-set component in theta order");
  cls->add_option("--tol-rat,--tol_rat", tol_rat, "floor of the rational acceptance tolerance");

  // verify ----------------------------------------------------------------
  auto* ver = app.add_subcommand("verify", "run the self-check suite; exit 3 on any failure");
  add_common(ver, c);
  bool quick = false;
  std::uint64_t seed = 20240101;
  ver->add_flag("--quick", quick, "sub-second subset");
  ver->add_option("--seed", seed, "seed of the random states");

  // kappa-max -------------------------------------------------------------
  auto* kmx = app.add_subcommand("kappa-max", "largest kappa on the N = 0 resonance curve as JSON");
  add_common(kmx, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!c.config.empty()) apply_config(sub, c.config);

    Model m;
    make_model(c, sub, sub == ver, m);

    if (sub == sim) {
      if (!tmax) invalid("missing --tmax");
      Buffer csv;
      double eps_drift = 0.0, f1_drift = 0.0;
      if (system == "full") {
        if (kappa || energy || theta0 || ptheta0 || *eam)
          invalid("--system full takes --omega and --gamma only; drop the reduced initial conditions");
        if (omega_s.empty() || gamma_s.empty()) invalid("--system full needs --omega and --gamma");
        const auto w = parse_triple(omega_s, "--omega");
        const auto g = parse_triple(gamma_s, "--gamma");
        double renorm = 0.0;
        check(rr_simulate_full_ex(m.m, w.data(), g.data(), *tmax, dt, &csv.b, &eps_drift, &f1_drift, &renorm));
        std::fprintf(stderr, "max gamma renormalization %.3e\n", renorm);
      } else {
        if (!omega_s.empty() || !gamma_s.empty()) invalid("--omega/--gamma need --system full");
        if (!kappa || !theta0) invalid("reduced simulation needs --kappa and --theta0");
        if ((energy ? 1 : 0) + (*eam ? 1 : 0) > 1) invalid("give at most one of --energy and --energy-above-min");
        double p0 = ptheta0.value_or(0.0);
        if (energy || *eam) {
          double e = 0.0;
          if (energy) {
            e = *energy;
          } else {
            double delta = 0.1;
            if (!eam_raw.empty()) {
              try {
                delta = std::stod(eam_raw);
              } catch (const std::logic_error&) {
                invalid("--energy-above-min expects a number, got '" + eam_raw + "'");
              }
            }
            check(rr_epsilon_min(m.m, &e));
            e += delta;
          }
          check(rr_p_theta_for_energy(m.m, *kappa, *theta0, e, ptheta0 && *ptheta0 < 0.0 ? -1 : 1, &p0));
          spdlog::info("energy {} gives p_theta0 = {}", e, p0);
        }
        check(rr_simulate_reduced(m.m, *theta0, p0, *kappa, *tmax, dt, &csv.b, &eps_drift, &f1_drift));
      }
      emit(c.out, csv.text());
      std::fprintf(stderr, "max relative energy drift %.3e, max |F1| %.3e\n", eps_drift, f1_drift);
    } else if (sub == bif) {
      Buffer json;
      check(rr_bifurcation(m.m, &json.b));
      int ok = 0;
      Buffer problems;
      check(rr_check_diagram(rr_buffer_data(json.b), &ok, &problems.b));
      if (!ok) {
        spdlog::error("diagram document failed its schema check:\n{}", problems.text());
        throw ExitWith{kNumerical};
      }
      emit(c.out, json.text());
    } else if (sub == rot) {
      if (theta0) {
        if (!kappa_range.empty() || !energy_range.empty() || !energies.empty() || kappas.size() != 1)
          invalid("--theta0 takes exactly one --kappa and no energy grid");
        double e = 0.0;
        check(rr_locate(m.m, kappas[0], *theta0, ptheta0.value_or(0.0), &e, &branch));
        energies = {e};
      } else {
        if (!kappa_range.empty()) {
          const auto r = parse_range(kappa_range);
          kappas.insert(kappas.end(), r.begin(), r.end());
        }
        if (!energy_range.empty()) {
          const auto r = parse_range(energy_range);
          energies.insert(energies.end(), r.begin(), r.end());
        }
        if (kappas.empty() || energies.empty()) invalid("rotation-number needs kappa and energy values");
      }
      Buffer csv;
      check(rr_rotation_grid(m.m, kappas.data(), kappas.size(), energies.data(), energies.size(), branch, c.jobs,
                             &csv.b));
      emit(c.out, csv.text());
    } else if (sub == res) {
      if (!kappa_range.empty()) {
        const auto r = parse_range(kappa_range);
        kappas.insert(kappas.end(), r.begin(), r.end());
      }
      if (kappas.empty()) invalid("resonance needs --kappa or --kappa-range");
      Buffer csv;
      check(rr_resonance(m.m, orders.data(), orders.size(), kappas.data(), kappas.size(), branch, c.jobs, &csv.b));
      emit(c.out, csv.text());
    } else if (sub == cls) {
      if (!kappa) invalid("classify needs --kappa");
      double e = 0.0;
      int b = 0;
      if (theta0) {
        if (energy) invalid("give either --energy or --theta0, not both");
        check(rr_locate(m.m, *kappa, *theta0, ptheta0.value_or(0.0), &e, &b));
        if (branch_opt && *branch_opt != b) invalid("--branch contradicts the component containing --theta0");
      } else {
        if (!energy) invalid("classify needs --energy or --theta0");
        e = *energy;
        b = branch_opt.value_or(0);
      }
      Buffer json;
      check(rr_classify(m.m, *kappa, e, b, tol_rat, &json.b));
      emit(c.out, json.text());
    } else if (sub == ver) {
      int all = 0;
      Buffer report;
      check(rr_verify(m.m, quick ? 1 : 0, seed, &all, &report.b));
      emit(c.out, report.text());
      if (!all) return kVerifyFailed;
    } else if (sub == kmx) {
      Buffer json;
      check(rr_kappa_max_json(m.m, c.jobs, &json.b));
      emit(c.out, json.text());
    }
  } catch (const ExitWith& e) {
    return e.code;
  }
  return kOk;
}
