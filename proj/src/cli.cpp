#include "qspectra/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "qspectra/operator_a.hpp"
#include "qspectra/operator_b.hpp"
#include "qspectra/oracle.hpp"
#include "qspectra/qkernel.hpp"

namespace qspectra::cli {
namespace {

using nlohmann::json;

const Complex kI(0.0, 1.0);

struct CommandName {
  Command command;
  const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::spec_a, "spec-a"},           {Command::spec_b, "spec-b"}, {Command::eigvec_b, "eigvec-b"},
    {Command::measure_b, "measure-b"},     {Command::density_grid, "density-grid"},
    {Command::verify, "verify"},           {Command::oracle, "oracle"},
};

// Collects residuals of one identity family.
class Family {
 public:
  Family(std::string name, double tolerance) : s_{std::move(name), 0.0, 0.0, tolerance, 0} {}

  void add(double r) {
    if (std::isnan(r)) r = std::numeric_limits<double>::infinity();
    s_.max = std::max(s_.max, r);
    sum_ += r;
    ++s_.count;
    s_.mean = sum_ / s_.count;
  }
  ResidualSummary summary() const { return s_; }

 private:
  ResidualSummary s_;
  double sum_ = 0.0;
};

double rel_diff(Complex a, Complex b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double tolerance_or(const RunConfig& c, double fallback) { return c.tolerance.value_or(fallback); }

operator_b::BParams b_params(const RunConfig& c) { return operator_b::BParams(*c.alpha, QBase(c.q)); }

SpectrumWindow window_or(const RunConfig& c, SpectrumWindow fallback) { return c.window.value_or(fallback); }

operator_b::EnergySet parse_set(const std::string& text) {
  if (text == "R" || text == "r" || text == "all") return operator_b::EnergySet::real_line();
  operator_b::EnergySet set;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':', 1);
    if (colon == std::string::npos) throw UsageError("energy interval must be lo:hi, got '" + part + "'");
    try {
      set.intervals.push_back({std::stod(part.substr(0, colon)), std::stod(part.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw UsageError("energy interval must be lo:hi, got '" + part + "'");
    }
    if (!(set.intervals.back().lo <= set.intervals.back().hi)) throw UsageError("energy interval needs lo <= hi");
  }
  if (set.intervals.empty()) throw UsageError("empty energy set");
  return set;
}

json spectrum_points(const std::vector<operator_a::SpectrumPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({{"index", p.index}, {"value", p.value}, {"secular_residual", p.secular_residual}});
  return arr;
}

// Relative residual of the B recurrence along eigenvector m over j in [lo, hi].
double eigenvector_recurrence(int m, const operator_b::BParams& p, int lo, int hi, const SeriesPolicy& pol) {
  const Complex z = p.q().power(m) / p.alpha();
  double worst = 0.0;
  auto v = [&](int j) { return operator_b::eigenvector_entry(m, j, p, pol); };
  for (int j = lo; j <= hi; ++j) worst = std::max(worst, operator_b::recurrence_residual(v, j, z, p));
  return worst;
}

ReportEnvelope run_spec_a(const RunConfig& c) {
  const QBase q(c.q);
  const auto spec = operator_a::point_spectrum_a(*c.t, q, window_or(c, {-3, 3}));
  ReportEnvelope r;
  Family fam("secular", tolerance_or(c, operator_a::kSecularTolerance));
  for (const auto& p : spec.positive_branch) fam.add(p.secular_residual);
  for (const auto& p : spec.negative_branch) fam.add(p.secular_residual);
  r.results = {{"s", spec.s},
               {"t", spec.t.to_string()},
               {"positive_branch", spectrum_points(spec.positive_branch)},
               {"negative_branch", spectrum_points(spec.negative_branch)}};
  r.residuals.push_back(fam.summary());
  return r;
}

ReportEnvelope run_spec_b(const RunConfig& c) {
  const auto p = b_params(c);
  ReportEnvelope r;
  json eig = json::array();
  Family fam("eigenvector-recurrence", tolerance_or(c, 1e-10));
  if (p.is_free()) {
    r.results = {{"free", true}, {"eigenvalues", eig}, {"essential_spectrum", {-2.0, 2.0}}};
    return r;
  }
  for (const auto& e : operator_b::point_spectrum_b(p, *c.m_max)) {
    eig.push_back({{"m", e.m}, {"value", e.value}});
    fam.add(eigenvector_recurrence(e.m, p, -10, 10, c.policy()));
  }
  r.results = {{"delta", p.delta()}, {"beta", p.beta()}, {"eigenvalues", eig}, {"essential_spectrum", {-2.0, 2.0}}};
  r.residuals.push_back(fam.summary());
  return r;
}

ReportEnvelope run_eigvec_b(const RunConfig& c) {
  const auto p = b_params(c);
  const auto pol = c.policy();
  const int m = *c.m;
  const SpectrumWindow w = window_or(c, {-10, 10});
  const auto v = operator_b::eigenvector_b(m, p, w, pol);
  json entries = json::array();
  for (int j = w.n_min; j <= w.n_max; ++j) entries.push_back({{"j", j}, {"value", v[static_cast<std::size_t>(j - w.n_min)]}});
  const double closed = operator_b::eigenvector_norm(m, p, operator_b::NormMethod::closed_form, pol);
  const double direct = operator_b::eigenvector_norm(m, p, operator_b::NormMethod::direct_sum, pol);
  ReportEnvelope r;
  Family norm("eigenvector-norm", tolerance_or(c, 1e-10));
  norm.add(std::abs(closed - direct) / closed);
  Family rec("eigenvector-recurrence", tolerance_or(c, 1e-10));
  rec.add(eigenvector_recurrence(m, p, w.n_min, w.n_max, pol));
  r.results = {{"m", m},
               {"eigenvalue", p.q().power(m) / p.alpha() + p.alpha() * p.q().power(-m)},
               {"entries", entries},
               {"norm_closed_form", closed},
               {"norm_direct_sum", direct}};
  r.residuals = {norm.summary(), rec.summary()};
  return r;
}

ReportEnvelope run_measure_b(const RunConfig& c) {
  const auto p = b_params(c);
  const auto pol = c.policy();
  const auto set = parse_set(c.set);
  const auto element = operator_b::spectral_measure_element(c.k, c.l, p, pol);
  json atoms = json::array();
  for (const auto& a : element.atoms) {
    if (set.contains(a.location)) atoms.push_back({{"m", a.m}, {"location", a.location}, {"weight", a.weight}});
  }
  const double value = operator_b::spectral_measure(c.k, c.l, set, p, pol);
  const double whole = operator_b::spectral_measure(c.k, c.l, operator_b::EnergySet::real_line(), p, pol);
  ReportEnvelope r;
  Family fam("measure-completeness", tolerance_or(c, 1e-6));
  fam.add(std::abs(whole - (c.k == c.l ? 1.0 : 0.0)));
  r.results = {{"k", c.k}, {"l", c.l}, {"set", c.set}, {"atoms", atoms}, {"measure", value}, {"total_mass", whole}};
  r.residuals.push_back(fam.summary());
  return r;
}

ReportEnvelope run_density_grid(const RunConfig& c) {
  const auto p = b_params(c);
  const auto pol = c.policy();
  ReportEnvelope r;
  Family pos("density-positivity", tolerance_or(c, 0.0));
  json rows = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "phi,density_kl,re_f_k,im_f_k,re_f_l,im_f_l\n";
  for (int i = 0; i < c.grid; ++i) {
    const double phi = kPi * (i + 0.5) / c.grid;
    const double d = operator_b::ac_density(phi, c.k, c.l, p, pol);
    Complex fk(0.0, 0.0);
    Complex fl(0.0, 0.0);
    if (!p.is_free()) {
      fk = operator_b::f_n(c.k, std::exp(kI * phi), p, pol);
      fl = operator_b::f_n(c.l, std::exp(kI * phi), p, pol);
    }
    if (c.k == c.l) pos.add(std::max(0.0, -d));
    rows.push_back({{"phi", phi}, {"density_kl", d}, {"re_f_k", fk.real()}, {"im_f_k", fk.imag()}, {"re_f_l", fl.real()}, {"im_f_l", fl.imag()}});
    csv << phi << ',' << d << ',' << fk.real() << ',' << fk.imag() << ',' << fl.real() << ',' << fl.imag() << '\n';
  }
  r.results = {{"k", c.k}, {"l", c.l}, {"grid", c.grid}, {"rows", rows}};
  r.csv = csv.str();
  if (c.k == c.l) r.residuals.push_back(pos.summary());
  return r;
}

ReportEnvelope run_verify(const RunConfig& c) {
  ReportEnvelope r;
  r.residuals = verify_suite(c.suite, c.q, c.alpha, c.policy(), c.seed);
  if (c.tolerance) {
    for (auto& s : r.residuals) s.tolerance = *c.tolerance;
  }
  r.results = {{"suite", c.suite}};
  return r;
}

// Largest relative distance from |x| to the lattice q^{2Z + shift}.
double family_distance(const std::vector<double>& values, const QBase& q, int shift, double lo, double hi) {
  double worst = 0.0;
  for (double v : values) {
    const double a = std::abs(v);
    if (a < lo || a > hi) continue;
    const double k = std::round((std::log(a) / q.log() - shift) / 2.0);
    const double target = q.power(2.0 * k + shift);
    worst = std::max(worst, std::abs(a - target) / target);
  }
  return worst;
}

ReportEnvelope run_oracle(const RunConfig& c) {
  ReportEnvelope r;
  const QBase q(c.q);
  oracle::EigenOptions opt;
  opt.want_vectors = c.vectors;
  opt.seed = c.seed;
  json payload;
  if (c.op == "a") {
    const SpectrumWindow w = window_or(c, {-40, 20});
    const auto m = oracle::truncate_a(q, w);
    const auto e = oracle::eigen_tridiag(m, opt);
    // a Dirichlet cut selects an extension; compare with the two explicit families
    // the cut at n_max moves |x| by about 25 x^2 q^{n_max} relative; keep that below 1e-7
    const double lo = q.power(0.5 * w.n_max);
    const double hi = std::max(lo, q.power(10.0 - 0.5 * w.n_max));
    const double d0 = family_distance(e.values, q, 1, lo, hi);
    const double dinf = family_distance(e.values, q, 0, lo, hi);
    Family fam("truncation-family", tolerance_or(c, 1e-6));
    fam.add(std::min(d0, dinf));
    r.residuals.push_back(fam.summary());
    payload = {{"operator", "a"},
               {"window", {w.n_min, w.n_max}},
               {"values", e.values},
               {"nearest_family", d0 <= dinf ? "t=0" : "t=inf"},
               {"compared_band", {lo, hi}},
               {"residual_bound", e.residual_bound},
               {"seed", e.seed}};
  } else {
    const auto p = b_params(c);
    const SpectrumWindow w = window_or(c, {-80, 80});
    const auto e = oracle::eigen_tridiag(oracle::truncate_b(p, w), opt);
    Family fam("oracle-vs-closed-form", tolerance_or(c, 1e-8));
    if (!p.is_free()) {
      for (const auto& ev : operator_b::point_spectrum_b(p, p.delta() + 6)) {
        double best = std::numeric_limits<double>::infinity();
        for (double v : e.values) best = std::min(best, std::abs(v - ev.value));
        fam.add(best);
      }
    }
    r.residuals.push_back(fam.summary());
    payload = {{"operator", "b"},
               {"window", {w.n_min, w.n_max}},
               {"values", e.values},
               {"residual_bound", e.residual_bound},
               {"seed", e.seed}};
  }
  r.results = payload;
  return r;
}

std::string format_name(Format f) { return f == Format::json ? "json" : "csv"; }

}  // namespace

std::string to_string(Command c) {
  for (const auto& cn : kCommands) {
    if (cn.command == c) return cn.name;
  }
  throw UsageError("unknown command");
}

Command parse_command(const std::string& name) {
  for (const auto& cn : kCommands) {
    if (name == cn.name) return cn.command;
  }
  throw UsageError("unknown command '" + name + "'");
}

void RunConfig::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw UsageError("--q must lie in (0,1)");
  auto need_alpha = [&] {
    if (!alpha) throw UsageError("--alpha is required for " + to_string(command));
  };
  if (window && window->n_min > window->n_max) throw UsageError("--window needs lo <= hi");
  if (format == Format::csv && command != Command::density_grid) throw UsageError("csv output is only available for density-grid");
  if (rel_tol && !(*rel_tol > 0.0 && *rel_tol < 1.0)) throw UsageError("--rel-tol must lie in (0,1)");
  if (max_terms && *max_terms < 1) throw UsageError("--max-terms must be positive");
  if (tolerance && !(*tolerance >= 0.0)) throw UsageError("--tolerance must be nonnegative");
  switch (command) {
    case Command::spec_a:
      if (!t) throw UsageError("--t is required for spec-a");
      break;
    case Command::spec_b:
      need_alpha();
      if (!m_max) throw UsageError("--m-max is required for spec-b");
      break;
    case Command::eigvec_b:
      need_alpha();
      if (!m) throw UsageError("--m is required for eigvec-b");
      break;
    case Command::measure_b:
      need_alpha();
      parse_set(set);
      break;
    case Command::density_grid:
      need_alpha();
      if (grid < 1) throw UsageError("--grid must be positive");
      break;
    case Command::verify: {
      const auto& names = suite_names();
      if (std::find(names.begin(), names.end(), suite) == names.end()) throw UsageError("unknown suite '" + suite + "'");
      if ((suite == "og-qbessel" || suite == "measure-completeness") && !alpha) need_alpha();
      break;
    }
    case Command::oracle:
      if (op != "a" && op != "b") throw UsageError("--operator must be a or b");
      if (op == "b") need_alpha();
      if (window && window->size() < 2) throw UsageError("--window needs at least two sites");
      break;
  }
}

SeriesPolicy RunConfig::policy() const {
  SeriesPolicy p;
  if (rel_tol) p.rel_tol = *rel_tol;
  if (max_terms) p.max_terms = *max_terms;
  return p;
}

json to_json(const RunConfig& c) {
  json j = {{"command", to_string(c.command)}, {"q", c.q}, {"format", format_name(c.format)}, {"seed", c.seed}};
  if (c.alpha) j["alpha"] = *c.alpha;
  if (c.t) j["t"] = c.t->to_string();
  if (c.window) j["window"] = {c.window->n_min, c.window->n_max};
  if (c.m_max) j["m_max"] = *c.m_max;
  if (c.m) j["m"] = *c.m;
  switch (c.command) {
    case Command::measure_b:
      j["set"] = c.set;
      [[fallthrough]];
    case Command::density_grid:
      j["k"] = c.k;
      j["l"] = c.l;
      if (c.command == Command::density_grid) j["grid"] = c.grid;
      break;
    case Command::verify:
      j["suite"] = c.suite;
      break;
    case Command::oracle:
      j["operator"] = c.op;
      j["vectors"] = c.vectors;
      break;
    default:
      break;
  }
  if (c.rel_tol) j["rel_tol"] = *c.rel_tol;
  if (c.max_terms) j["max_terms"] = *c.max_terms;
  if (c.tolerance) j["tolerance"] = *c.tolerance;
  if (!c.output.empty()) j["output"] = c.output;
  return j;
}

bool ReportEnvelope::ok() const { return failing_family().empty(); }

std::string ReportEnvelope::failing_family() const {
  for (const auto& s : residuals) {
    if (!s.ok()) return s.family;
  }
  return {};
}

json ReportEnvelope::to_json() const {
  json res = json::array();
  for (const auto& s : residuals) {
    res.push_back({{"family", s.family}, {"max", s.max}, {"mean", s.mean}, {"tolerance", s.tolerance}, {"count", s.count}, {"ok", s.ok()}});
  }
  return {{"tool_version", tool_version}, {"config", config}, {"results", results},
          {"residuals", res},           {"ok", ok()},       {"wall_time_ms", wall_time_ms}};
}

ReportEnvelope ReportEnvelope::from_json(const json& j) {
  ReportEnvelope r;
  r.tool_version = j.at("tool_version").get<std::string>();
  r.config = j.at("config");
  r.results = j.at("results");
  for (const auto& s : j.at("residuals")) {
    r.residuals.push_back({s.at("family").get<std::string>(), s.at("max").get<double>(), s.at("mean").get<double>(),
                           s.at("tolerance").get<double>(), s.at("count").get<int>()});
  }
  r.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
  return r;
}

std::string ReportEnvelope::render(Format f) const {
  if (f == Format::csv) return csv;
  return to_json().dump(2) + "\n";
}

ReportEnvelope run(const RunConfig& config) {
  config.validate();
  config.policy().validate();
  const auto start = std::chrono::steady_clock::now();
  ReportEnvelope r;
  switch (config.command) {
    case Command::spec_a:
      r = run_spec_a(config);
      break;
    case Command::spec_b:
      r = run_spec_b(config);
      break;
    case Command::eigvec_b:
      r = run_eigvec_b(config);
      break;
    case Command::measure_b:
      r = run_measure_b(config);
      break;
    case Command::density_grid:
      r = run_density_grid(config);
      break;
    case Command::verify:
      r = run_verify(config);
      break;
    case Command::oracle:
      r = run_oracle(config);
      break;
  }
  r.config = to_json(config);
  r.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  if (!config.output.empty()) {
    std::ofstream out(config.output);
    if (!out) throw UsageError("cannot open output file '" + config.output + "'");
    out << r.render(config.format);
  }
  return r;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"triple-product", "xi", "og-ramanujan", "og-qbessel", "wronskians", "measure-completeness"};
  return names;
}

std::vector<ResidualSummary> verify_suite(const std::string& suite, double qv, std::optional<double> alpha,
                                          const SeriesPolicy& pol, std::uint64_t seed) {
  const QBase q(qv);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<ResidualSummary> out;

  if (suite == "triple-product") {
    Family fam("triple-product", 1e-12);
    for (int i = 0; i < 150; ++i) {
      const double r = 0.1 + 2.9 * uni(rng);
      const Complex x = std::polar(r, 2.0 * kPi * uni(rng));
      const Complex a = qkernel::theta(x, q, qkernel::ThetaMethod::product, pol);
      const Complex b = qkernel::theta(x, q, qkernel::ThetaMethod::bilateral_sum, pol);
      fam.add(rel_diff(b, a));
    }
    out.push_back(fam.summary());
  } else if (suite == "xi") {
    Family annulus("xi-annulus", 1e-11);
    Family outside("xi-continuation", 1e-11);
    const double sq = std::sqrt(qv);
    for (int i = 0; i < 20; ++i) {
      const double r = sq + (1.0 / sq - sq) * (0.05 + 0.9 * uni(rng));
      const Complex z = std::polar(r, 2.0 * kPi * uni(rng));
      const Complex ml = qkernel::xi(z, q, qkernel::XiMethod::mittag_leffler, pol);
      const Complex la = qkernel::xi(z, q, qkernel::XiMethod::laurent, pol);
      const Complex cf = qkernel::xi(z, q, qkernel::XiMethod::closed_form, pol);
      annulus.add(std::max(rel_diff(ml, la), rel_diff(ml, cf)));
    }
    for (int i = 0; i < 10; ++i) {
      const double r = i % 2 == 0 ? sq * (0.05 + 0.9 * uni(rng)) : (1.0 / sq) * (1.1 + 5.0 * uni(rng));
      const Complex z = std::polar(r, 2.0 * kPi * uni(rng));
      outside.add(rel_diff(qkernel::xi(z, q, qkernel::XiMethod::mittag_leffler, pol),
                           qkernel::xi(z, q, qkernel::XiMethod::closed_form, pol)));
    }
    out = {annulus.summary(), outside.summary()};
  } else if (suite == "og-ramanujan") {
    Family fam("og-ramanujan", 1e-9);
    auto add = [&](const operator_a::IdentityCheck& c) { fam.add(c.rhs == Complex(0.0, 0.0) ? c.mass_residual : c.residual); };
    add(operator_a::og_ramanujan_first(0.8, 0, q, pol));
    add(operator_a::og_ramanujan_first(0.8, 2, q, pol));
    add(operator_a::og_ramanujan_second(0.8, 0, q, pol));
    add(operator_a::og_ramanujan_second(0.8, 1, q, pol));
    add(operator_a::og_ramanujan_third(0.6, 1, 1, q, pol));
    add(operator_a::og_ramanujan_third(0.6, 0, 2, q, pol));
    Family phi("og-varphi", 1e-9);
    auto addp = [&](const operator_a::IdentityCheck& c) { phi.add(c.rhs == Complex(0.0, 0.0) ? c.mass_residual : c.residual); };
    addp(operator_a::og_varphi_first(1.1, 0, 0, q, pol));
    addp(operator_a::og_varphi_first(1.1, 0, 1, q, pol));
    addp(operator_a::og_varphi_second(1.1, 0, 1, q, pol));
    addp(operator_a::og_varphi_dual(0.9, 2, 2, q, pol));
    addp(operator_a::og_varphi_dual(0.9, 1, 2, q, pol));
    out = {fam.summary(), phi.summary()};
  } else if (suite == "og-qbessel") {
    const operator_b::BParams p(*alpha, q);
    Family og("og-qbessel", 1e-10);
    const int d = p.delta();
    for (int m = d + 1; m <= d + 3; ++m) {
      for (int n = d + 1; n <= d + 3; ++n) og.add(operator_b::qbessel_orthogonality(m, n, p, pol));
    }
    Family sum("qbessel-square-sum", 1e-10);
    for (double x : {0.2, 0.5, 0.8}) sum.add(std::abs(operator_b::qbessel_square_sum(x, q, pol) * (1.0 - x * x) - 1.0));
    out = {og.summary(), sum.summary()};
  } else if (suite == "wronskians") {
    Family wa("wronskian-a", 1e-11);
    const Complex expect = 2.0 * kI * std::sqrt(qv);
    for (double x : {1.3, 0.4}) {
      for (int n = -10; n <= 10; ++n) {
        using operator_a::Sign;
        const Complex a = q.power(-n) * operator_a::psi_pm(n + 1, x, q, Sign::plus, pol) *
                          operator_a::psi_pm(n, x, q, Sign::minus, pol);
        const Complex b = q.power(-n) * operator_a::psi_pm(n, x, q, Sign::plus, pol) *
                          operator_a::psi_pm(n + 1, x, q, Sign::minus, pol);
        // toward -infinity the two products outgrow W and cancel in double precision
        if (std::abs(a) + std::abs(b) > 1e4 * std::abs(expect)) continue;
        wa.add(std::abs(a - b - expect) / std::abs(expect));
      }
    }
    out.push_back(wa.summary());
    if (alpha && *alpha != 0.0) {
      const operator_b::BParams p(*alpha, q);
      Family wb("wronskian-b", 1e-11);
      for (Complex z : {Complex(0.3, 0.0), Complex(0.4, 0.2), Complex(-0.5, 0.1)}) {
        const Complex closed = operator_b::wronskian_fg(z, p, operator_b::WronskianMethod::closed_form, pol);
        for (int n : {-10, 0, 10}) wb.add(rel_diff(operator_b::wronskian_at(n, z, p, pol), closed));
      }
      out.push_back(wb.summary());
    }
  } else if (suite == "measure-completeness") {
    const operator_b::BParams p(*alpha, q);
    Family fam("measure-completeness", 1e-6);
    for (int k : {-2, 0, 3}) {
      for (int l : {-2, 0, 3}) {
        const double e = operator_b::spectral_measure(k, l, operator_b::EnergySet::real_line(), p, pol);
        fam.add(std::abs(e - (k == l ? 1.0 : 0.0)));
      }
    }
    out.push_back(fam.summary());
  } else {
    throw UsageError("unknown suite '" + suite + "'");
  }
  return out;
}

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::string* help_text) {
  CLI::App app{"Spectral analysis of the Jacobi operators A(q) and B(alpha,q)", "qspectra"};
  app.fallthrough();
  app.require_subcommand(1);
  for (const auto& cn : kCommands) app.add_subcommand(cn.name);

  RunConfig c;
  double alpha = 0.0;
  std::string t;
  std::string window;
  int m_max = 0;
  int m = 0;
  double rel_tol = 0.0;
  int max_terms = 0;
  double tolerance = 0.0;
  std::string format = "json";
  app.add_option("--q", c.q, "base q in (0,1)")->required();
  auto* o_alpha = app.add_option("--alpha", alpha, "coupling constant of B");
  auto* o_t = app.add_option("--t", t, "extension parameter, a number or inf");
  auto* o_window = app.add_option("--window", window, "index window lo:hi");
  auto* o_mmax = app.add_option("--m-max", m_max, "largest eigenvalue index");
  auto* o_m = app.add_option("--m", m, "eigenvector index");
  app.add_option("--k", c.k, "row index of the measure element");
  app.add_option("--l", c.l, "column index of the measure element");
  app.add_option("--grid", c.grid, "number of phi grid nodes");
  app.add_option("--suite", c.suite, "verification suite");
  app.add_option("--set", c.set, "energy set: R or lo:hi,lo:hi");
  app.add_option("--operator", c.op, "oracle target: a or b");
  app.add_flag("--vectors", c.vectors, "compute oracle eigenvectors");
  auto* o_rel = app.add_option("--rel-tol", rel_tol, "series relative tolerance");
  auto* o_max = app.add_option("--max-terms", max_terms, "series term budget");
  auto* o_tol = app.add_option("--tolerance", tolerance, "check tolerance override");
  app.add_option("--seed", c.seed, "seed for random samples and inverse iteration");
  app.add_option("-o,--output", c.output, "output file");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    if (help_text) *help_text = app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  c.command = parse_command(app.get_subcommands().front()->get_name());
  try {
    if (*o_alpha) c.alpha = alpha;
    if (*o_t) c.t = ExtensionParam::parse(t);
    if (*o_window) c.window = SpectrumWindow::parse(window);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (*o_mmax) c.m_max = m_max;
  if (*o_m) c.m = m;
  if (*o_rel) c.rel_tol = rel_tol;
  if (*o_max) c.max_terms = max_terms;
  if (*o_tol) c.tolerance = tolerance;
  c.format = format == "csv" ? Format::csv : Format::json;
  c.validate();
  return c;
}

int main(int argc, const char* const* argv) {
  std::optional<RunConfig> config;
  try {
    std::string help;
    config = parse_args(argc, argv, &help);
    if (!config) {
      std::cout << help;
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  try {
    ReportEnvelope r = run(*config);
    if (config->output.empty()) std::cout << r.render(config->format);
    if (!r.ok()) {
      std::cerr << "identity outside tolerance: " << r.failing_family() << "\n";
      return 1;
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure in " << to_string(config->command) << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qspectra::cli
