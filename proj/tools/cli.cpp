#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "contraction/bounds.hpp"
#include "contraction/curvature.hpp"
#include "contraction/distance.hpp"
#include "contraction/models.hpp"
#include "contraction/montecarlo.hpp"
#include "contraction/sde.hpp"
#include "contraction/spectral.hpp"

namespace contraction::cli {

namespace {

class CertifiedFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& name, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)) != "") {
    throw std::invalid_argument("--" + name + " expects a number, got '" + text + "'");
  }
  return v;
}

ModelParams parse_params(const std::vector<std::string>& items) {
  ModelParams out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--param expects key=value, got '" + item + "'");
    }
    const std::string key = trim(item.substr(0, eq));
    out[key] = parse_number("param " + key, item.substr(eq + 1));
  }
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string describe(const ModelParams& params) {
  std::vector<std::string> parts;
  for (const auto& [k, v] : params) parts.push_back(k + "=" + num(v));
  return join(parts, ',');
}

void echo_config(const CLI::App& sub, std::ostream& os) {
  os << "# contraction-kit " << sub.get_name() << "\n";
  os << "# config: command=" << sub.get_name() << "\n";
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt == sub.get_help_ptr()) continue;
    const std::string value = opt->count() > 0 ? join(opt->results(), ',') : opt->get_default_str();
    if (value.empty() || value == "{}" || value == "[]") continue;
    os << "# config: " << opt->get_single_name() << "=" << value << "\n";
  }
}

struct Common {
  std::string out_path;
  std::string format = "human";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out_path, "Write output to this file instead of stdout");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"human", "csv"}));
}

/// Stream for the command's main output: the --out file or the default.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot open output file '" + path + "'");
      os_ = &file_;
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

// ---- rate -----------------------------------------------------------------

struct ProfileSource {
  std::string profile;
  std::string model;
  std::vector<std::string> params;
  std::string kappa;
  double alpha = 1.0;
  std::size_t block = 0;
};

void add_profile_source(CLI::App* sub, ProfileSource& s) {
  sub->add_option("--profile", s.profile, "Curvature profile CSV (r,kappa)")->check(CLI::ExistingFile);
  sub->add_option("--model", s.model, "Registry model whose block profile is used");
  sub->add_option("--param", s.params, "Model parameter key=value (repeatable)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sub->add_option("--kappa", s.kappa, "Constant curvature value");
  sub->add_option("--alpha", s.alpha, "Metric distortion for --kappa")->check(CLI::PositiveNumber);
  sub->add_option("--block", s.block, "Block index for --model");
}

CurvatureProfile resolve_profile(const ProfileSource& s) {
  const int given = !s.profile.empty() + !s.model.empty() + !s.kappa.empty();
  if (given != 1) throw std::invalid_argument("exactly one of --profile, --model, --kappa is required");
  if (!s.profile.empty()) return load_profile_csv(s.profile);
  if (!s.kappa.empty()) {
    return CurvatureProfile::constant(parse_number("kappa", s.kappa),
                                      MetricSpec::from_alpha(NormKind::intrinsic, s.alpha));
  }
  RegisteredModel reg = make_model(s.model, parse_params(s.params));
  if (s.block >= reg.profiles.size()) throw std::invalid_argument("--block out of range");
  return reg.profiles[s.block];
}

void write_table(const std::string& path, const DistanceTable& t) {
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot open table file '" + path + "'");
  os << "r,phi,Phi,g,f\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << exact(t.r[i]) << ',' << exact(t.phi[i]) << ',' << exact(t.Phi[i]) << ',' << exact(t.g[i])
       << ',' << exact(t.f[i]) << "\n";
  }
}

struct RateOpts {
  ProfileSource source;
  Common common;
  std::size_t n_grid = 1024;
  double local = 0.0;
  std::string table;
  std::string save_profile;
};

int cmd_rate(const CLI::App& sub, const RateOpts& o, std::ostream& out) {
  const CurvatureProfile profile = resolve_profile(o.source);
  if (!o.save_profile.empty()) save_profile_csv(o.save_profile, profile);
  if (o.local < 0.0) throw std::invalid_argument("--local must be > 0 (0 disables)");

  QuadratureOptions q;
  q.n_grid = o.n_grid;
  const double R0 = compute_R0(profile);
  std::string R1 = "NA", c = "NA", cR;
  const DistanceTable* table = nullptr;
  std::unique_ptr<DistanceFunction> df;
  std::unique_ptr<LocalDistanceFunction> ldf;
  const ProfileDiagnostics diag = validate_profile(profile);
  if (diag.valid) {
    df = std::make_unique<DistanceFunction>(build_distance(profile, q));
    R1 = num(df->R1());
    c = num(df->rate());
    table = &df->table();
  } else if (o.local == 0.0) {
    require_valid(profile);
  }
  if (o.local > 0.0) {
    ldf = std::make_unique<LocalDistanceFunction>(build_local_distance(profile, o.local, q));
    cR = num(ldf->rate());
    if (!table) table = &ldf->table();
  }
  if (!o.table.empty() && table) write_table(o.table, *table);

  Sink sink(o.common.out_path, out);
  std::ostream& os = *sink;
  echo_config(sub, os);
  if (o.common.format == "csv") {
    os << "R0,R1,c" << (ldf ? ",c_R" : "") << "\n";
    os << num(R0) << ',' << R1 << ',' << c << (ldf ? "," + cR : "") << "\n";
  } else {
    os << "R0=" << num(R0) << "\nR1=" << R1 << "\nc=" << c << "\n";
    if (ldf) os << "c_R=" << cR << "\n";
    for (const auto& v : diag.violations) os << "# profile: " << v << "\n";
  }
  return kSuccess;
}

// ---- bounds ---------------------------------------------------------------

struct BoundsOpts {
  Common common;
  std::string which;
  std::map<std::string, std::string> value;
  std::vector<double> c, eps, phi, w;
  std::string interaction = "mean-field";
};

double need(const BoundsOpts& o, const std::string& key) {
  const auto it = o.value.find(key);
  if (it == o.value.end() || it->second.empty()) {
    throw std::invalid_argument("--case " + o.which + " requires --" + key);
  }
  return parse_number(key, it->second);
}

bool has(const BoundsOpts& o, const std::string& key) {
  const auto it = o.value.find(key);
  return it != o.value.end() && !it->second.empty();
}

void emit(std::ostream& os, const std::string& format,
          const std::vector<std::pair<std::string, std::string>>& fields) {
  if (format == "csv") {
    for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << fields[i].first;
    os << "\n";
    for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << fields[i].second;
    os << "\n";
  } else {
    for (const auto& [k, v] : fields) os << k << "=" << v << "\n";
  }
}

int cmd_bounds(const CLI::App& sub, const BoundsOpts& o, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> fields;
  int code = kSuccess;
  if (o.which == "lemma") {
    const double alpha = has(o, "alpha") ? need(o, "alpha") : 1.0;
    const RateBound b = lemma_rate_bound(need(o, "R"), need(o, "L"), need(o, "K"), alpha);
    fields = {{"case", to_string(b.case_tag)}, {"c_lower", num(b.value)}, {"inverse_bound", num(b.inverse)}};
  } else if (o.which == "perturb") {
    const double c0 = need(o, "c0");
    const double R = need(o, "R");
    if (has(o, "lip") == has(o, "sup-gamma")) {
      throw std::invalid_argument("--case perturb requires exactly one of --lip, --sup-gamma");
    }
    if (has(o, "lip")) {
      fields = {{"case", "lipschitz"}, {"c_lower", num(perturbation_lipschitz(c0, R, need(o, "lip")))}};
    } else {
      fields = {{"case", "bounded"}, {"c_lower", num(perturbation_bounded(c0, R, need(o, "sup-gamma")))}};
    }
  } else if (o.which == "product") {
    if (o.c.empty()) throw std::invalid_argument("--case product requires --c");
    const std::size_t n = o.c.size();
    const std::vector<double> phi = o.phi.empty() ? std::vector<double>(n, 1.0) : o.phi;
    if (phi.size() != n) throw std::invalid_argument("--phi needs one value per --c");
    ProductRate r;
    std::string tag = "product";
    if (has(o, "lambda")) {
      tag = "perturbed-product";
      r = perturbed_product_rate(o.c, phi, need(o, "lambda"));
    } else {
      const std::vector<double> eps = o.eps.empty() ? std::vector<double>(n, 0.0) : o.eps;
      const std::vector<double> w = o.w.empty() ? std::vector<double>(n, 1.0) : o.w;
      if (eps.size() != n || w.size() != n) {
        throw std::invalid_argument("--eps and --w need one value per --c");
      }
      try {
        r = product_rate(o.c, eps, phi, w);
      } catch (const std::domain_error& e) {
        throw CertifiedFailure(e.what());
      }
    }
    fields = {{"case", tag}, {"c_lower", num(r.rate)}, {"A", num(r.A)},
              {"certified", r.certified ? "yes" : "no"}};
    if (!r.certified) code = kCertifiedFailure;
  } else if (o.which == "interact") {
    const auto n = static_cast<std::size_t>(need(o, "n"));
    const double a = need(o, "a");
    const double M = need(o, "M");
    const double phi = has(o, "phi-R0") ? need(o, "phi-R0") : 1.0;
    if (o.c.size() != 1) throw std::invalid_argument("--case interact requires a single --c");
    const InteractionKind kind = parse_interaction_kind(o.interaction);
    if (kind == InteractionKind::general) {
      throw std::invalid_argument("--interaction must be mean-field or nearest-neighbour");
    }
    const InteractionMatrix m = kind == InteractionKind::mean_field ? InteractionMatrix::mean_field(n, a)
                                                                   : InteractionMatrix::nearest_neighbour(n, a);
    const InteractingRate r = interacting_rate(o.c[0], phi, M, m);
    fields = {{"case", to_string(kind)},
              {"lambda", num(r.lambda)},
              {"theta", num(interaction_theta(M, phi))},
              {"c_lower", num(r.rate)},
              {"A", num(r.A)},
              {"certified", r.certified ? "yes" : "no"},
              {"condition_holds", r.condition_holds ? "yes" : "no"}};
    if (!r.certified) code = kCertifiedFailure;
  } else {
    const double d = need(o, "d");
    if (d < 2.0 || d != std::floor(d)) throw std::invalid_argument("--d must be an integer >= 2");
    const HeatEqRate r = heat_eq_rate(static_cast<std::size_t>(d), need(o, "L"), need(o, "R"));
    fields = {{"case", r.case_tag}, {"K_d", num(r.K_d)}, {"inverse_bound", num(r.inverse_bound)},
              {"c_lower", num(r.rate_bound)}};
  }
  Sink sink(o.common.out_path, out);
  echo_config(sub, *sink);
  emit(*sink, o.common.format, fields);
  return code;
}

// ---- simulate / verify ----------------------------------------------------

struct SimOpts {
  Common common;
  std::string model;
  std::vector<std::string> params;
  std::string profile;
  std::string coupling = "reflection";
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  double T = 10.0;
  double h = 1e-3;
  double delta = 1e-3;
  double eps_merge = 1e-6;
  double save_dt = 0.25;
  std::size_t threads = 0;
  bool capture = true;
  std::string distance = "f";
  // verify only
  std::string rate;
  std::string slack = "scaled";
  std::string weighting = "inverse-variance";
  std::string series;
};

void add_sim_options(CLI::App* sub, SimOpts& o) {
  sub->add_option("--model", o.model, "Registry model")->required();
  sub->add_option("--param", o.params, "Model parameter key=value (repeatable)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sub->add_option("--profile", o.profile, "Replace the curvature profile (single-block models)")->check(CLI::ExistingFile);
  sub->add_option("--coupling", o.coupling, "Coupling kind")
      ->check(CLI::IsMember({"synchronous", "reflection", "componentwise"}));
  sub->add_option("--paths", o.paths, "Number of coupled paths")->check(CLI::Range(100ul, 100000000ul));
  sub->add_option("--seed", o.seed, "Base seed");
  sub->add_option("--T", o.T, "Horizon")->check(CLI::PositiveNumber);
  sub->add_option("--h", o.h, "Euler step")->check(CLI::PositiveNumber);
  sub->add_option("--delta", o.delta, "Componentwise ramp width")->check(CLI::PositiveNumber);
  sub->add_option("--eps-merge", o.eps_merge, "Merge threshold")->check(CLI::PositiveNumber);
  sub->add_option("--save-dt", o.save_dt, "Spacing of save times")->check(CLI::PositiveNumber);
  sub->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
  sub->add_option("--capture", o.capture, "Place sign-changing reflected blocks on the band edge");
  sub->add_option("--distance", o.distance, "Per-block distance")->check(CLI::IsMember({"f", "identity"}));
}

struct Prepared {
  RegisteredModel reg;
  std::vector<std::shared_ptr<const DistanceFunction>> dfs;
  std::vector<BlockDistance> metric;
  CouplingConfig config;
};

void build_distances(Prepared& p) {
  if (!p.dfs.empty()) return;
  for (const auto& profile : p.reg.profiles) {
    require_valid(profile);
    p.dfs.push_back(std::make_shared<const DistanceFunction>(build_distance(profile)));
  }
}

Prepared prepare(const SimOpts& o) {
  Prepared p{make_model(o.model, parse_params(o.params)), {}, {}, {}};
  if (!o.profile.empty()) {
    if (p.reg.profiles.size() != 1) throw std::invalid_argument("--profile needs a single-block model");
    p.reg.profiles[0] = load_profile_csv(o.profile);
  }
  if (o.distance == "f") {
    build_distances(p);
    for (const auto& df : p.dfs) p.metric.push_back({[df](double r) { return df->f(r); }, 1.0});
  } else {
    p.metric = identity_distances(p.reg.model.block_count());
  }
  CouplingConfig& c = p.config;
  c.kind = parse_coupling_kind(o.coupling);
  c.delta = o.delta;
  c.eps_merge = o.eps_merge;
  c.h = o.h;
  c.T = o.T;
  c.save_times = uniform_save_times(o.T, o.save_dt);
  c.n_paths = o.paths;
  c.seed = o.seed;
  c.x0 = p.reg.x0;
  c.y0 = p.reg.y0;
  c.capture_at_band = o.capture;
  c.threads = o.threads;
  c.validate(p.reg.model);
  return p;
}

void write_series(std::ostream& os, const DecaySeries& s) {
  if (!s.note.empty()) os << "# note: " << s.note << "\n";
  os << "t,mean_df,stderr,n_paths\n";
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    os << exact(s.times[k]) << ',' << exact(s.mean[k]) << ',' << exact(s.std_error[k]) << ',' << s.n_paths
       << "\n";
  }
}

int cmd_simulate(const CLI::App& sub, const SimOpts& o, std::ostream& out) {
  Prepared p = prepare(o);
  const DecaySeries s = estimate_mean_distance(p.reg.model, p.config, p.metric);
  Sink sink(o.common.out_path, out);
  echo_config(sub, *sink);
  *sink << "# model: " << describe(p.reg.params) << "\n";
  write_series(*sink, s);
  return kSuccess;
}

struct Certified {
  double c;
  std::string source;
};

Certified certified_rate(Prepared& p) {
  build_distances(p);
  double c = std::numeric_limits<double>::infinity();
  double phi = std::numeric_limits<double>::infinity();
  for (const auto& df : p.dfs) {
    c = std::min(c, df->rate());
    phi = std::min(phi, df->phi_R0());
  }
  if (p.reg.interaction) {
    const InteractingRate r = interacting_rate(c, phi, p.reg.params.at("M"), *p.reg.interaction);
    if (!r.certified) throw CertifiedFailure("interaction too strong: no contraction certified");
    return {r.rate, "interacting"};
  }
  return {c, p.dfs.size() > 1 ? "product" : "profile"};
}

int cmd_verify(const CLI::App& sub, const SimOpts& o, std::ostream& out) {
  Prepared p = prepare(o);
  const Certified cert = o.rate.empty() ? certified_rate(p) : Certified{parse_number("rate", o.rate), "given"};
  if (!(cert.c > 0.0)) throw std::invalid_argument("certified rate must be > 0");
  const DecaySeries s = estimate_mean_distance(p.reg.model, p.config, p.metric);
  if (!o.series.empty()) {
    std::ofstream os(o.series);
    if (!os) throw std::invalid_argument("cannot open series file '" + o.series + "'");
    echo_config(sub, os);
    write_series(os, s);
  }
  const SlackRule rule = o.slack == "literal" ? SlackRule::literal : SlackRule::scaled;
  const ContractionReport report = check_contraction(s, cert.c, rule);
  const FitWeighting weighting =
      o.weighting == "uniform" ? FitWeighting::uniform : FitWeighting::inverse_variance;

  std::vector<std::pair<std::string, std::string>> fields = {{"c", num(cert.c)}, {"c_source", cert.source}};
  try {
    const RateFit fit = fit_decay_rate(s, weighting);
    fields.insert(fields.end(), {{"fit_rate", num(fit.rate)},
                                 {"sigma_residual", num(fit.sigma_rate)},
                                 {"sigma_jackknife", num(fit.sigma_jackknife)},
                                 {"r_squared", num(fit.r_squared)},
                                 {"window", std::to_string(fit.first) + "-" + std::to_string(fit.last)}});
  } catch (const FitFailure& e) {
    fields.insert(fields.end(), {{"fit_rate", "NA"},
                                 {"sigma_residual", "NA"},
                                 {"sigma_jackknife", "NA"},
                                 {"r_squared", "NA"},
                                 {"window", "NA"}});
  }
  if (p.config.kind == CouplingKind::componentwise && !p.dfs.empty()) {
    std::vector<double> cs;
    for (const auto& df : p.dfs) cs.push_back(df->rate());
    const double m = componentwise_penalty(cs, p.reg.profiles, o.delta);
    fields.insert(fields.end(), {{"m_delta", num(m)}, {"floor_bound", num(m / cert.c)}});
  }
  fields.insert(fields.end(), {{"slack", o.slack},
                               {"worst_violation", num(report.worst_violation)},
                               {"check", report.passed ? "PASS" : "FAIL"}});
  Sink sink(o.common.out_path, out);
  echo_config(sub, *sink);
  *sink << "# model: " << describe(p.reg.params) << "\n";
  emit(*sink, o.common.format, fields);
  return report.passed ? kSuccess : kCertifiedFailure;
}

// ---- eigen / heat-eq ------------------------------------------------------

struct EigenOpts {
  Common common;
  double L = 1.0;
  double R = 4.0;
  double ramp = 0.5;
  double kout = 1.0;
  std::string x_max;
  std::size_t n_grid = 2000;
};

int cmd_eigen(const CLI::App& sub, const EigenOpts& o, std::ostream& out) {
  const DoubleWellPotential potential(o.L, o.R, o.ramp, o.kout);
  const double x_max = o.x_max.empty() ? potential.default_x_max() : parse_number("x-max", o.x_max);
  const double bound = doublewell_bound(o.L, o.R);
  const EigenResult r = dirichlet_lambda1([&](double x) { return potential.dU(x); }, x_max, o.n_grid);
  const bool pass = r.lambda1 <= bound;
  Sink sink(o.common.out_path, out);
  echo_config(sub, *sink);
  emit(*sink, o.common.format,
       {{"lambda1", num(r.lambda1)},
        {"bound", num(bound)},
        {"n_grid", std::to_string(r.n_grid)},
        {"x_max", num(r.x_max)},
        {"residual", num(r.residual)},
        {"boundary_weight", num(r.boundary_weight)},
        {"check", pass ? "PASS" : "FAIL"}});
  return pass ? kSuccess : kCertifiedFailure;
}

struct HeatOpts {
  Common common;
  std::size_t d = 16;
  double L = 12.0;
  double R = 1.0;
  std::size_t n_grid = 1024;
  double tolerance = 1.1;
};

int cmd_heat(const CLI::App& sub, const HeatOpts& o, std::ostream& out) {
  const HeatEqRate bound = heat_eq_rate(o.d, o.L, o.R);
  const LocalDistanceFunction local =
      build_local_distance(CurvatureProfile::constant(2.0 * bound.K_d), o.R, o.n_grid);
  const double inverse = 1.0 / local.rate();
  const bool pass = inverse <= o.tolerance * bound.inverse_bound;
  Sink sink(o.common.out_path, out);
  echo_config(sub, *sink);
  emit(*sink, o.common.format,
       {{"K_d", num(bound.K_d)},
        {"case", bound.case_tag},
        {"inverse_bound", num(bound.inverse_bound)},
        {"inverse_quadrature", num(inverse)},
        {"ratio", num(inverse / bound.inverse_bound)},
        {"check", pass ? "PASS" : "FAIL"}});
  return pass ? kSuccess : kCertifiedFailure;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t number = 0;
  const std::string echo = "# config:";
  // Once an echo line is seen the file is a previous run's output and its
  // body is skipped.
  bool echoed = false;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.rfind(echo, 0) == 0) {
      line = trim(line.substr(echo.size()));
      echoed = true;
    } else if (line.empty() || line[0] == '#' || echoed) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::string command;
  std::vector<std::string> rest;
  std::vector<std::string> from_config;
  try {
    std::size_t i = 0;
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') command = args[i++];
    std::vector<std::string> config_paths;
    for (; i < args.size(); ++i) {
      if (args[i] == "--config") {
        if (i + 1 >= args.size()) throw std::invalid_argument("--config requires a file");
        config_paths.push_back(args[++i]);
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_paths.push_back(args[i].substr(9));
      } else {
        rest.push_back(args[i]);
      }
    }
    for (const auto& path : config_paths) {
      std::ifstream in(path);
      if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
      for (const auto& [key, value] : read_config(in)) {
        if (key == "command") {
          if (command.empty()) command = value;
          if (command != value) {
            throw std::invalid_argument("config file '" + path + "' is for command '" + value + "'");
          }
        } else {
          from_config.push_back("--" + key + "=" + value);
        }
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  CLI::App app{"Certified contraction rates for diffusions: quadrature, bounds and coupling simulation",
               "contraction-kit"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  // -h is taken by the step size.
  app.set_help_flag("--help", "Print this help message and exit");
  app.footer("Any option may also be given in a key=value file via --config FILE; '# config:' lines\n"
             "of a previous run's output are accepted, so an output header reruns the command.");

  CLI::App* rate = app.add_subcommand("rate", "Rate c, R0, R1 of a curvature profile");
  RateOpts rate_o;
  add_profile_source(rate, rate_o.source);
  add_common(rate, rate_o.common);
  rate->add_option("--n-grid", rate_o.n_grid, "Initial quadrature grid")->check(CLI::Range(64ul, 1ul << 24));
  rate->add_option("--local", rate_o.local, "Also compute the local rate c_R (0 disables)");
  rate->add_option("--table", rate_o.table, "Write the f-table CSV (r,phi,Phi,g,f)");
  rate->add_option("--save-profile", rate_o.save_profile, "Write the resolved profile CSV");

  CLI::App* bounds = app.add_subcommand("bounds", "Closed-form rate bounds");
  BoundsOpts bounds_o;
  add_common(bounds, bounds_o.common);
  bounds->add_option("--case", bounds_o.which, "Bound family")
      ->required()
      ->check(CLI::IsMember({"lemma", "perturb", "product", "interact", "heat"}));
  for (const char* key : {"R", "L", "K", "alpha", "c0", "lip", "sup-gamma", "lambda", "n", "a", "M", "phi-R0", "d"}) {
    bounds->add_option(std::string("--") + key, bounds_o.value[key]);
  }
  for (auto [key, vec] : {std::pair{"c", &bounds_o.c}, {"eps", &bounds_o.eps}, {"phi", &bounds_o.phi},
                          {"w", &bounds_o.w}}) {
    bounds->add_option(std::string("--") + key, *vec, "Comma-separated per-component values")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  }
  bounds->add_option("--interaction", bounds_o.interaction, "mean-field or nearest-neighbour");

  CLI::App* simulate = app.add_subcommand("simulate", "Coupled-path ensemble; decay CSV t,mean_df,stderr,n_paths");
  SimOpts sim_o;
  add_sim_options(simulate, sim_o);
  add_common(simulate, sim_o.common);

  CLI::App* verify = app.add_subcommand("verify", "Ensemble, decay fit and contraction check");
  SimOpts ver_o;
  add_sim_options(verify, ver_o);
  add_common(verify, ver_o.common);
  verify->add_option("--rate", ver_o.rate, "Certified rate to check (default: from the model)");
  verify->add_option("--slack", ver_o.slack, "Slack rule")->check(CLI::IsMember({"scaled", "literal"}));
  verify->add_option("--weighting", ver_o.weighting, "Fit weighting")
      ->check(CLI::IsMember({"inverse-variance", "uniform"}));
  verify->add_option("--series", ver_o.series, "Also write the decay series CSV");

  CLI::App* eigen = app.add_subcommand("eigen", "Dirichlet eigenvalue of the double well against its bound");
  EigenOpts eigen_o;
  add_common(eigen, eigen_o.common);
  eigen->add_option("--L", eigen_o.L, "Concavity inside the well")->check(CLI::NonNegativeNumber);
  eigen->add_option("--R", eigen_o.R, "Width of the concave region")->check(CLI::NonNegativeNumber);
  eigen->add_option("--ramp", eigen_o.ramp, "Width of the U'' ramp")->check(CLI::PositiveNumber);
  eigen->add_option("--kout", eigen_o.kout, "U'' outside")->check(CLI::PositiveNumber);
  eigen->add_option("--x-max", eigen_o.x_max, "Truncation point (default 4 (R/2 + sqrt(8/kout)))");
  eigen->add_option("--n-grid", eigen_o.n_grid, "Initial grid")->check(CLI::Range(4ul, 1ul << 24));

  CLI::App* heat = app.add_subcommand("heat-eq", "Local rate of the discretized stochastic heat equation");
  HeatOpts heat_o;
  add_common(heat, heat_o.common);
  heat->add_option("--d", heat_o.d, "Grid size")->check(CLI::Range(2ul, 1ul << 20));
  heat->add_option("--L", heat_o.L, "Reaction coefficient");
  heat->add_option("--R", heat_o.R, "Local radius")->check(CLI::PositiveNumber);
  heat->add_option("--n-grid", heat_o.n_grid, "Initial quadrature grid")->check(CLI::Range(64ul, 1ul << 24));
  heat->add_option("--tolerance", heat_o.tolerance, "Allowed quadrature / bound ratio")->check(CLI::PositiveNumber);

  std::vector<std::string> tokens;
  if (!command.empty()) tokens.push_back(command);
  tokens.insert(tokens.end(), from_config.begin(), from_config.end());
  tokens.insert(tokens.end(), rest.begin(), rest.end());
  std::reverse(tokens.begin(), tokens.end());
  try {
    app.parse(tokens);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kSuccess;
    }
    err << "error: " << e.what() << "\n";
    err << "run 'contraction-kit --help' for usage\n";
    return kUsageError;
  }

  try {
    if (rate->parsed()) return cmd_rate(*rate, rate_o, out);
    if (bounds->parsed()) return cmd_bounds(*bounds, bounds_o, out);
    if (simulate->parsed()) return cmd_simulate(*simulate, sim_o, out);
    if (verify->parsed()) return cmd_verify(*verify, ver_o, out);
    if (eigen->parsed()) return cmd_eigen(*eigen, eigen_o, out);
    if (heat->parsed()) return cmd_heat(*heat, heat_o, out);
  } catch (const CertifiedFailure& e) {
    err << "certified failure: " << e.what() << "\n";
    return kCertifiedFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kCertifiedFailure;
  }
  err << "error: no command\n";
  return kUsageError;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace contraction::cli
