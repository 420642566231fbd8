#pragma once

// Scenario documents (JSON, schema 1) and the commands that run them.
// Commands return the files they would write plus a summary; writing is
// left to the caller.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wavedecay/decay_synthesis.hpp"
#include "wavedecay/eigensolver.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/fdtd.hpp"
#include "wavedecay/io.hpp"
#include "wavedecay/oracle_compare.hpp"
#include "wavedecay/signal.hpp"
#include "wavedecay/wave_solver.hpp"

namespace wavedecay::scenario {

using json = nlohmann::ordered_json;

enum class CoefficientKind { Constant, Sine, Csv };
enum class TimeKind { ExpDecay, Boxcar, Bump, Zero };
enum class SpaceKind { Sine, Mode, Parabola };
enum class InitialKind { Synthesized, Explicit, Zero };

struct CoefficientSpec {
  CoefficientKind kind = CoefficientKind::Constant;
  double value = 1.0;      // constant
  double base = 1.0;       // sine: base + amplitude sin(k pi x / length)
  double amplitude = 0.0;
  double k = 1.0;
  std::filesystem::path csv;
};

struct ForcingSpec {
  bool from_csv = false;
  std::filesystem::path csv;  // space-time CSV
  TailPolicy csv_tail;
  TimeKind time = TimeKind::Zero;
  double rate = 1.0;         // exp_decay
  double support_end = 0.0;  // boxcar, bump
  SpaceKind space = SpaceKind::Sine;
  std::size_t k = 1;
  double amplitude = 1.0;
  double tail_tolerance = 1e-8;
};

struct Perturbation {
  std::size_t mode = 1;  // 1-based
  double delta = 0.0;
  char component = 'g';
};

struct VerifySpec {
  decay::Window window;
  double threshold = 1e-4;
};

struct FdtdSpec {
  double cfl = 0.5;
  std::size_t cells = 0;  // 0: same as the domain
  std::size_t record_every = 1;
  double T = 0.0;  // 0: the scenario horizon
  double tolerance = 5e-3;
};

struct Scenario {
  std::string name;
  double length = std::numbers::pi;
  std::size_t n_cells = 400;
  CoefficientSpec coefficient;
  BasisSource basis = BasisSource::FEM;
  std::size_t modes = 0;  // 0: default count
  double dt = 0.01;
  double T = 10.0;
  std::size_t output_every = 1;
  ForcingSpec forcing;
  InitialKind initial = InitialKind::Synthesized;
  std::filesystem::path initial_csv;
  std::optional<Perturbation> perturbation;
  std::optional<VerifySpec> verify;
  FdtdSpec fdtd;
  json outputs = json::object();
  std::filesystem::path base_dir;

  std::string output_name(const std::string& key, const std::string& fallback) const {
    return outputs.contains(key) ? outputs.at(key).get<std::string>() : fallback;
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail_parse {

struct Reader {
  const json& j;
  std::string path;

  [[noreturn]] void fail(const std::string& msg) const { throw PreconditionError("scenario." + path + ": " + msg); }

  Reader at(const std::string& key) const {
    if (!j.is_object() || !j.contains(key)) fail("missing field '" + key + "'");
    return {j.at(key), path.empty() ? key : path + "." + key};
  }
  bool has(const std::string& key) const { return j.is_object() && j.contains(key); }

  double number() const {
    if (j.is_string() && j.get<std::string>() == "pi") return std::numbers::pi;
    if (!j.is_number()) fail("expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be > 0");
    return v;
  }
  std::size_t count() const {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail("expected a non-negative integer");
    return j.get<std::size_t>();
  }
  std::string string() const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }
  double number_or(const std::string& key, double fallback) const { return has(key) ? at(key).number() : fallback; }
};

inline TailPolicy parse_tail(const Reader& r) {
  const auto kind = r.at("kind").string();
  const double tol = r.number_or("tolerance", 1e-8);
  if (kind == "compact_support") return TailPolicy::compact(r.at("support_end").number(), tol);
  if (kind == "exponential_envelope") return TailPolicy::exponential(r.at("scale").number(), r.at("rate").positive(), tol);
  if (kind == "truncate_at_end") return TailPolicy::truncate(tol);
  r.at("kind").fail("unknown tail kind '" + kind + "'");
}

inline CoefficientSpec parse_coefficient(const Reader& r, const std::filesystem::path& base) {
  CoefficientSpec c;
  if (r.has("constant")) {
    c.kind = CoefficientKind::Constant;
    c.value = r.at("constant").number();
  } else if (r.has("sine")) {
    const auto s = r.at("sine");
    c.kind = CoefficientKind::Sine;
    c.base = s.at("base").number();
    c.amplitude = s.at("amplitude").number();
    c.k = s.number_or("k", 1.0);
  } else if (r.has("csv")) {
    c.kind = CoefficientKind::Csv;
    c.csv = base / r.at("csv").string();
  } else {
    r.fail("expected one of 'constant', 'sine', 'csv'");
  }
  return c;
}

inline ForcingSpec parse_forcing(const Reader& r, const std::filesystem::path& base) {
  ForcingSpec f;
  if (r.has("csv")) {
    f.from_csv = true;
    f.csv = base / r.at("csv").string();
    f.csv_tail = parse_tail(r.at("tail"));
    return f;
  }
  const auto g = r.at("generator");
  const auto t = g.at("time");
  const auto tk = t.at("kind").string();
  if (tk == "exp_decay") {
    f.time = TimeKind::ExpDecay;
    f.rate = t.number_or("rate", 1.0);
    if (!(f.rate > 0.0)) t.fail("rate must be > 0");
  } else if (tk == "boxcar" || tk == "bump") {
    f.time = tk == "boxcar" ? TimeKind::Boxcar : TimeKind::Bump;
    f.support_end = t.at("support_end").positive();
  } else if (tk == "zero") {
    f.time = TimeKind::Zero;
  } else {
    t.at("kind").fail("unknown time profile '" + tk + "'");
  }
  if (f.time != TimeKind::Zero) {
    const auto s = g.at("space");
    const auto sk = s.at("kind").string();
    if (sk == "sine") {
      f.space = SpaceKind::Sine;
    } else if (sk == "mode") {
      f.space = SpaceKind::Mode;
    } else if (sk == "parabola") {
      f.space = SpaceKind::Parabola;
    } else {
      s.at("kind").fail("unknown space profile '" + sk + "'");
    }
    if (f.space != SpaceKind::Parabola) {
      f.k = s.at("k").count();
      if (f.k == 0) s.at("k").fail("must be >= 1");
    }
  }
  f.amplitude = g.number_or("amplitude", 1.0);
  f.tail_tolerance = g.number_or("tail_tolerance", 1e-8);
  return f;
}

}  // namespace detail_parse

/// Validates and reads a schema-1 scenario. Relative file references are
/// resolved against base_dir.
inline Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir = {}) {
  using detail_parse::Reader;
  const Reader root{doc, ""};
  if (!doc.is_object()) root.fail("document must be a JSON object");
  if (root.at("schema").count() != 1) root.at("schema").fail("unsupported schema version (expected 1)");
  Scenario s;
  s.base_dir = base_dir;
  s.name = root.at("name").string();

  const auto dom = root.at("domain");
  s.length = dom.at("length").positive();
  s.n_cells = dom.at("n_cells").count();
  if (s.n_cells < 2) dom.at("n_cells").fail("must be >= 2");

  s.coefficient = detail_parse::parse_coefficient(root.at("coefficient"), base_dir);
  const auto basis = root.has("basis") ? root.at("basis").string() : std::string("fem");
  if (basis == "analytic") {
    s.basis = BasisSource::Analytic;
    if (s.coefficient.kind != CoefficientKind::Constant) root.at("basis").fail("analytic basis needs a constant coefficient");
  } else if (basis == "fem") {
    s.basis = BasisSource::FEM;
  } else {
    root.at("basis").fail("expected 'analytic' or 'fem'");
  }
  if (root.has("modes")) s.modes = root.at("modes").count();

  const auto time = root.at("time");
  s.dt = time.at("dt").positive();
  s.T = time.at("T").positive();
  if (time.has("output_every")) s.output_every = std::max<std::size_t>(1, time.at("output_every").count());

  s.forcing = detail_parse::parse_forcing(root.at("forcing"), base_dir);

  if (root.has("initial_data")) {
    const auto init = root.at("initial_data");
    const auto kind = init.at("kind").string();
    if (kind == "synthesized") {
      s.initial = InitialKind::Synthesized;
    } else if (kind == "explicit") {
      s.initial = InitialKind::Explicit;
      s.initial_csv = base_dir / init.at("csv").string();
    } else if (kind == "zero") {
      s.initial = InitialKind::Zero;
    } else {
      init.at("kind").fail("expected 'synthesized', 'explicit' or 'zero'");
    }
    if (init.has("perturbation")) {
      const auto p = init.at("perturbation");
      Perturbation pert;
      pert.mode = p.at("mode").count();
      if (pert.mode == 0) p.at("mode").fail("modes are numbered from 1");
      pert.delta = p.at("delta").number();
      const auto comp = p.has("component") ? p.at("component").string() : std::string("g");
      if (comp != "g" && comp != "h") p.at("component").fail("expected 'g' or 'h'");
      pert.component = comp[0];
      s.perturbation = pert;
    }
  }

  if (root.has("verify")) {
    const auto v = root.at("verify");
    const auto w = v.at("window");
    if (!w.j.is_array() || w.j.size() != 2) w.fail("expected [start, end]");
    VerifySpec spec;
    spec.window = {Reader{w.j[0], w.path + "[0]"}.number(), Reader{w.j[1], w.path + "[1]"}.number()};
    spec.threshold = v.number_or("threshold", 1e-4);
    s.verify = spec;
  }

  if (root.has("fdtd")) {
    const auto f = root.at("fdtd");
    s.fdtd.cfl = f.number_or("cfl", 0.5);
    if (f.has("cells")) s.fdtd.cells = f.at("cells").count();
    if (f.has("record_every")) s.fdtd.record_every = std::max<std::size_t>(1, f.at("record_every").count());
    s.fdtd.T = f.number_or("T", 0.0);
    s.fdtd.tolerance = f.number_or("tolerance", 5e-3);
  }

  if (root.has("outputs")) {
    const auto& o = doc.at("outputs");
    if (!o.is_object()) root.at("outputs").fail("expected an object of file names");
    for (const auto& [key, value] : o.items()) {
      if (!value.is_string()) root.at("outputs").at(key).fail("expected a file name");
    }
    s.outputs = o;
  }
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw PreconditionError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_scenario(doc, path.parent_path());
}

// ---------------------------------------------------------------------------
// Construction

struct Setup {
  Scenario scenario;
  Grid1D grid{1.0, 2};
  CoefficientField coefficient;
  std::function<double(double)> a;  // coefficient as a function of x
  EllipticityReport ellipticity;
  std::shared_ptr<const EigenBasis> basis;
  std::size_t M = 0;
  std::function<double(double, double)> f;  // forcing f(t, x)
  wave::WaveProblem problem;                // g = h = 0 until resolved
};

namespace detail_setup {

inline std::function<double(double)> piecewise_linear(std::vector<double> x, std::vector<double> y) {
  return [x = std::move(x), y = std::move(y)](double xi) {
    if (xi <= x.front()) return y.front();
    if (xi >= x.back()) return y.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xi) - x.begin()) - 1;
    const double w = (xi - x[k]) / (x[k + 1] - x[k]);
    return (1.0 - w) * y[k] + w * y[k + 1];
  };
}

/// Bilinear interpolation of a space-time field on a uniform spatial grid.
inline std::function<double(double, double)> bilinear(std::shared_ptr<const wave::SpaceTimeField> field,
                                                      double length) {
  return [field, length](double t, double x) {
    const auto& ts = field->times;
    if (t > ts.back()) return 0.0;
    auto k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
    k = std::min(k, ts.size() - 1);
    k = k == 0 ? 0 : k - 1;
    const double wt = std::clamp((t - ts[k]) / (ts[k + 1] - ts[k]), 0.0, 1.0);
    const Grid1D grid(length, field->n_nodes - 1);
    return (1.0 - wt) * interpolate_nodal(field->at(k), grid, x) + wt * interpolate_nodal(field->at(k + 1), grid, x);
  };
}

}  // namespace detail_setup

/// Builds the basis, coefficient, forcing and problem described by a
/// scenario. modes_override > 0 replaces the scenario's mode count.
inline Setup build_setup(const Scenario& sc, std::size_t modes_override = 0) {
  Setup s;
  s.scenario = sc;
  s.grid = Grid1D(sc.length, sc.n_cells);
  const double L = sc.length;

  switch (sc.coefficient.kind) {
    case CoefficientKind::Constant: {
      const double v = sc.coefficient.value;
      s.a = [v](double) { return v; };
      break;
    }
    case CoefficientKind::Sine: {
      const auto c = sc.coefficient;
      s.a = [c, L](double x) { return c.base + c.amplitude * std::sin(c.k * std::numbers::pi * x / L); };
      break;
    }
    case CoefficientKind::Csv: {
      const auto t = io::read_csv(sc.coefficient.csv);
      detail::require(t.header.size() == 2 && t.rows.size() >= 2,
                      sc.coefficient.csv.string() + ": coefficient CSV needs columns x,a and two rows");
      std::vector<double> x, a;
      for (const auto& r : t.rows) {
        x.push_back(r[0]);
        a.push_back(r[1]);
      }
      for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        detail::require(x[i + 1] > x[i], sc.coefficient.csv.string() + ": x must be strictly increasing");
      }
      s.a = detail_setup::piecewise_linear(std::move(x), std::move(a));
      break;
    }
  }
  s.coefficient = CoefficientField::from_function(s.grid, s.a);
  s.ellipticity = ellipticity_check(s.coefficient);

  const std::size_t requested = modes_override > 0 ? modes_override : sc.modes;
  const std::size_t M = requested > 0 ? requested : std::min<std::size_t>(64, s.grid.interior_count());
  detail::require(M <= s.grid.interior_count(), "scenario: more modes than interior nodes");
  if (sc.basis == BasisSource::Analytic) {
    s.basis = std::make_shared<const EigenBasis>(analytic_interval_basis(L, sc.coefficient.value, M, sc.n_cells));
  } else {
    s.basis = std::make_shared<const EigenBasis>(fem_interval_basis(s.grid, s.coefficient, M));
  }
  s.M = M;

  const auto times = wave::uniform_times(sc.dt, sc.T);
  const auto& fs = sc.forcing;
  if (fs.from_csv) {
    auto field = std::make_shared<const wave::SpaceTimeField>(io::read_space_time_csv(fs.csv, s.grid));
    s.problem.forcing = *field;
    s.problem.tail = fs.csv_tail;
    s.f = detail_setup::bilinear(field, L);
  } else {
    std::function<double(double)> space;
    switch (fs.space) {
      case SpaceKind::Sine: {
        const double k = static_cast<double>(fs.k);
        space = [k, L](double x) { return std::sin(k * std::numbers::pi * x / L); };
        break;
      }
      case SpaceKind::Parabola:
        space = [L](double x) { return x * (L - x); };
        break;
      case SpaceKind::Mode: {
        detail::require(fs.k <= s.basis->count(), "scenario.forcing.generator.space.k: mode beyond the basis");
        if (s.basis->source == BasisSource::Analytic) {
          const double k = static_cast<double>(fs.k);
          space = [k, L](double x) { return std::sqrt(2.0 / L) * std::sin(k * std::numbers::pi * x / L); };
        } else {
          const auto phi = s.basis->modes[fs.k - 1];
          const Grid1D grid = s.grid;
          space = [phi, grid](double x) { return interpolate_nodal(phi, grid, x); };
        }
        break;
      }
    }
    std::function<double(double)> time;
    const double amp = fs.amplitude;
    switch (fs.time) {
      case TimeKind::ExpDecay: {
        const double r = fs.rate;
        time = [r](double t) { return std::exp(-r * t); };
        break;
      }
      case TimeKind::Boxcar: {
        const double e = fs.support_end;
        time = [e](double t) { return t <= e ? 1.0 : 0.0; };
        break;
      }
      case TimeKind::Bump: {
        const double e = fs.support_end;
        time = [e](double t) {
          if (t >= e) return 0.0;
          const double v = std::sin(std::numbers::pi * t / e);
          return v * v;
        };
        break;
      }
      case TimeKind::Zero:
        time = [](double) { return 0.0; };
        space = [](double) { return 0.0; };
        break;
    }
    s.f = [time, space, amp](double t, double x) { return amp * time(t) * space(x); };
    s.problem.forcing = wave::SpaceTimeField::sample(s.grid, times, s.f);
    switch (fs.time) {
      case TimeKind::ExpDecay: {
        // |f_m(t)| <= |f(t)|_{L2} = |amp| |space|_{L2} e^{-rate t}
        const auto prof = s.grid.sample(space);
        const double norm = std::sqrt(s.basis->inner(prof, prof));
        s.problem.tail = TailPolicy::exponential(std::abs(amp) * norm, fs.rate, fs.tail_tolerance);
        break;
      }
      case TimeKind::Boxcar:
      case TimeKind::Bump:
        detail::require(fs.support_end <= sc.T, "scenario.forcing: support end beyond the time horizon");
        s.problem.tail = TailPolicy::compact(fs.support_end, fs.tail_tolerance);
        break;
      case TimeKind::Zero:
        s.problem.tail = TailPolicy::compact(0.0, fs.tail_tolerance);
        break;
    }
  }
  s.problem.basis = s.basis;
  s.problem.g.assign(s.grid.node_count(), 0.0);
  s.problem.h.assign(s.grid.node_count(), 0.0);
  s.problem.validate();
  return s;
}

struct ResolvedData {
  std::vector<double> g;
  std::vector<double> h;
  std::optional<decay::SynthesisResult> synthesis;
};

/// Initial data as declared (synthesized, explicit or zero), without the perturbation.
inline ResolvedData base_initial_data(const Setup& s) {
  ResolvedData d;
  switch (s.scenario.initial) {
    case InitialKind::Synthesized:
      d.synthesis = decay::synthesize_initial_data(s.problem, s.M);
      d.g = d.synthesis->g_nodal;
      d.h = d.synthesis->h_nodal;
      break;
    case InitialKind::Explicit: {
      auto e = io::read_initial_data_csv(s.scenario.initial_csv, s.grid);
      d.g = std::move(e.g);
      d.h = std::move(e.h);
      d.g.front() = d.g.back() = d.h.front() = d.h.back() = 0.0;
      break;
    }
    case InitialKind::Zero:
      d.g.assign(s.grid.node_count(), 0.0);
      d.h.assign(s.grid.node_count(), 0.0);
      break;
  }
  return d;
}

inline void apply_perturbation(const Setup& s, const Perturbation& p, ResolvedData& d) {
  detail::require(p.mode <= s.basis->count(), "scenario.initial_data.perturbation.mode: beyond the basis");
  auto& target = p.component == 'g' ? d.g : d.h;
  const auto& phi = s.basis->modes[p.mode - 1];
  for (std::size_t i = 0; i < target.size(); ++i) target[i] += p.delta * phi[i];
}

inline wave::WaveProblem with_data(const Setup& s, const ResolvedData& d) {
  auto p = s.problem;
  p.g = d.g;
  p.h = d.h;
  return p;
}

// ---------------------------------------------------------------------------
// Commands

struct RunOptions {
  std::size_t modes = 0;
  bool timings = true;
};

struct CommandResult {
  int exit_code = 0;
  std::vector<std::pair<std::string, std::string>> files;  // name relative to the output directory, contents
  json summary;
};

namespace detail_cmd {

class Stopwatch {
 public:
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    laps_[stage] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }
  json report() const { return laps_; }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  json laps_ = json::object();
};

inline json eigen_summary(const Setup& s) {
  return {{"source", io::source_name(s.basis->source)},
          {"length", s.grid.length},
          {"n_cells", s.grid.n_cells},
          {"modes", s.M},
          {"lambda_1", s.basis->eigenvalues.front()},
          {"lambda_M", s.basis->eigenvalues.back()},
          {"ellipticity", s.ellipticity.lambda},
          {"near_degenerate", s.ellipticity.near_degenerate}};
}

inline json check(bool pass, json details) {
  details["pass"] = pass;
  return details;
}

inline std::vector<double> evaluation_times(const Setup& s, double end) {
  return wave::uniform_times(s.scenario.dt, end);
}

inline void finish(CommandResult& r, const Stopwatch& sw, const RunOptions& opt) {
  if (opt.timings) r.summary["timings_ms"] = sw.report();
}

}  // namespace detail_cmd

/// Basis JSON and an eigenvalue table. With a constant coefficient the
/// table compares FEM eigenvalues at n_cells/2 and n_cells against the exact ones.
inline CommandResult cmd_eigen(const Scenario& sc, const RunOptions& opt = {}) {
  detail_cmd::Stopwatch sw;
  const auto s = build_setup(sc, opt.modes);
  sw.lap("basis");
  CommandResult r;
  r.files.emplace_back(sc.output_name("basis", "basis.json"), io::dump(io::basis_to_json(*s.basis, &s.coefficient)));

  const bool constant = sc.coefficient.kind == CoefficientKind::Constant;
  const auto fine = s.basis->source == BasisSource::FEM ? *s.basis : fem_interval_basis(s.grid, s.coefficient, s.M);
  std::optional<EigenBasis> coarse;
  if (sc.n_cells >= 4 && s.M < sc.n_cells / 2) {
    const Grid1D half(sc.length, sc.n_cells / 2);
    coarse = fem_interval_basis(half, CoefficientField::from_function(half, s.a), s.M);
  }
  std::string table = "m,lambda";
  if (coarse) table += ",lambda_coarse";
  if (constant) table += ",lambda_exact,abs_error";
  if (constant && coarse) table += ",observed_order";
  table += '\n';
  double worst_rel = 0.0;
  for (std::size_t m = 0; m < s.M; ++m) {
    table += std::to_string(m + 1) + ',' + io::format_double(fine.eigenvalues[m]);
    if (coarse) table += ',' + io::format_double(coarse->eigenvalues[m]);
    if (constant) {
      const double k = static_cast<double>(m + 1) * std::numbers::pi / sc.length;
      const double exact = sc.coefficient.value * k * k;
      const double err = std::abs(fine.eigenvalues[m] - exact);
      worst_rel = std::max(worst_rel, err / exact);
      table += ',' + io::format_double(exact) + ',' + io::format_double(err);
      if (coarse) {
        const double ec = std::abs(coarse->eigenvalues[m] - exact);
        table += ',' + io::format_double(err > 0.0 && ec > 0.0 ? std::log2(ec / err) : 0.0);
      }
    }
    table += '\n';
  }
  sw.lap("table");
  r.files.emplace_back(sc.output_name("eigen_table", "eigen_table.csv"), std::move(table));
  r.summary = {{"command", "eigen"}, {"scenario", sc.name}, {"eigen", detail_cmd::eigen_summary(s)}};
  if (constant) r.summary["eigen"]["max_relative_error_vs_exact"] = worst_rel;
  detail_cmd::finish(r, sw, opt);
  return r;
}

inline CommandResult cmd_synthesize(const Scenario& sc, const RunOptions& opt = {}) {
  detail_cmd::Stopwatch sw;
  const auto s = build_setup(sc, opt.modes);
  sw.lap("setup");
  const auto syn = decay::synthesize_initial_data(s.problem, s.M);
  sw.lap("synthesis");
  CommandResult r;
  auto doc = io::synthesis_to_json(syn);
  doc["tail_policy"] = s.problem.tail.name();
  r.files.emplace_back(sc.output_name("synthesis", "synthesis.json"), io::dump(doc));
  std::string fields = "x,g,h\n";
  for (std::size_t i = 0; i < s.grid.node_count(); ++i) {
    fields += io::format_double(s.grid.node(i)) + ',' + io::format_double(syn.g_nodal[i]) + ',' +
              io::format_double(syn.h_nodal[i]) + '\n';
  }
  r.files.emplace_back(sc.output_name("initial_data", "initial_data.csv"), std::move(fields));
  r.summary = {{"command", "synthesize"},
               {"scenario", sc.name},
               {"modes", s.M},
               {"summable", syn.summable()},
               {"sums", doc["sums"]},
               {"tails_rigorous", syn.tails_rigorous}};
  detail_cmd::finish(r, sw, opt);
  return r;
}

/// Trajectory CSV and a run report with every enabled check.
inline CommandResult cmd_simulate(const Scenario& sc, const RunOptions& opt = {}) {
  using detail_cmd::check;
  detail_cmd::Stopwatch sw;
  const auto s = build_setup(sc, opt.modes);
  sw.lap("setup");
  auto data = base_initial_data(s);
  if (sc.perturbation) apply_perturbation(s, *sc.perturbation, data);
  const auto problem = with_data(s, data);
  const auto mp = wave::modal_problem(problem, s.M);
  const auto states = wave::evolve(mp, problem.forcing.times);
  sw.lap("evolve");

  json report;
  report["command"] = "simulate";
  report["scenario"] = sc.name;
  report["eigen"] = detail_cmd::eigen_summary(s);
  if (data.synthesis) {
    const auto& syn = *data.synthesis;
    report["synthesis"] = {{"sums", io::synthesis_to_json(syn)["sums"]}, {"tails_rigorous", syn.tails_rigorous}};
  } else {
    report["synthesis"] = nullptr;
  }

  json checks;
  const auto balance = wave::energy_balance(states, mp.forcing, mp.eigenvalues);
  checks["energy_balance"] = check(balance.relative_defect() <= 1e-6, {{"initial_energy", balance.initial_energy},
                                                                       {"relative_defect", balance.relative_defect()},
                                                                       {"tolerance", 1e-6}});
  const auto bound = wave::a_priori_bound(states, mp.forcing, *s.basis, s.ellipticity.lambda);
  checks["a_priori_bound"] = check(bound.holds(), {{"lhs", bound.lhs}, {"rhs", bound.rhs}});
  if (data.synthesis) {
    const auto& syn = *data.synthesis;
    checks["summability"] = check(syn.summable(), {{"sum_h2", syn.sum_h2},
                                                   {"sum_lambda_g2", syn.sum_lambda_g2},
                                                   {"minkowski_bound", syn.minkowski_bound}});
  }
  checks["truncation_gap"] = {{"value", wave::truncation_gap(states)}};
  if (sc.verify) {
    const auto& v = *sc.verify;
    try {
      const auto eval = detail_cmd::evaluation_times(s, v.window.end);
      const auto vs = wave::evolve(mp, eval);
      const auto verdict = decay::verify_decay(vs, v.window, v.threshold, mp.eigenvalues.front(), problem.tail);
      checks["decay"] = io::verdict_to_json(verdict);
    } catch (const PreconditionError& e) {
      checks["decay"] = {{"decays", nullptr}, {"not_applicable", e.what()}};
    }
  }
  report["checks"] = checks;
  sw.lap("checks");

  CommandResult r;
  std::vector<wave::SpectralState> out;
  for (std::size_t k = 0; k < states.size(); k += sc.output_every) out.push_back(states[k]);
  if ((states.size() - 1) % sc.output_every != 0) out.push_back(states.back());
  r.files.emplace_back(sc.output_name("trajectory", "trajectory.csv"), io::trajectory_csv(out, mp.eigenvalues));
  r.summary = report;
  detail_cmd::finish(r, sw, opt);
  r.files.emplace_back(sc.output_name("report", "report.json"), io::dump(r.summary));
  return r;
}

/// Verdicts for the synthesized data and, if the scenario declares one,
/// for the perturbed data. Exit code 3 when the synthesized data does not decay.
inline CommandResult cmd_verify(const Scenario& sc, const RunOptions& opt = {}) {
  detail::require(sc.verify.has_value(), "scenario: verify needs a 'verify' block with window and threshold");
  detail_cmd::Stopwatch sw;
  const auto s = build_setup(sc, opt.modes);
  sw.lap("setup");
  const auto& v = *sc.verify;
  const auto eval = detail_cmd::evaluation_times(s, v.window.end);

  ResolvedData synthesized;
  synthesized.synthesis = decay::synthesize_initial_data(s.problem, s.M);
  synthesized.g = synthesized.synthesis->g_nodal;
  synthesized.h = synthesized.synthesis->h_nodal;
  auto audit_of = [&](const ResolvedData& d) {
    return decay::dichotomy_audit(with_data(s, d), s.M, v.window, v.threshold, eval);
  };
  auto to_json = [](const decay::DichotomyAudit& a) {
    auto j = io::verdict_to_json(a.verdict);
    j["max_tail_amplitude"] = *std::max_element(a.amplitudes.begin(), a.amplitudes.end());
    j["amplitudes"] = a.amplitudes;
    j["consistent"] = a.consistent();
    return j;
  };
  const auto base = audit_of(synthesized);
  sw.lap("synthesized");
  json doc;
  doc["scenario"] = sc.name;
  doc["synthesized"] = to_json(base);
  if (sc.perturbation) {
    auto perturbed = synthesized;
    apply_perturbation(s, *sc.perturbation, perturbed);
    const auto pa = audit_of(perturbed);
    doc["perturbed"] = to_json(pa);
    doc["perturbed"]["perturbation"] = {{"mode", sc.perturbation->mode},
                                        {"delta", sc.perturbation->delta},
                                        {"component", std::string(1, sc.perturbation->component)}};
    doc["uniqueness_discrepancy"] =
        decay::uniqueness_check(*synthesized.synthesis, *s.basis, perturbed.g, perturbed.h);
    sw.lap("perturbed");
  }
  CommandResult r;
  r.exit_code = base.verdict.decays ? 0 : 3;
  r.summary = doc;
  r.summary["command"] = "verify";
  detail_cmd::finish(r, sw, opt);
  r.files.emplace_back(sc.output_name("verdict", "verdict.json"), io::dump(doc));
  return r;
}

/// Modal solution against the finite-difference solver on the same data.
inline CommandResult cmd_compare(const Scenario& sc, const RunOptions& opt = {}) {
  detail_cmd::Stopwatch sw;
  const auto s = build_setup(sc, opt.modes);
  auto data = base_initial_data(s);
  if (sc.perturbation) apply_perturbation(s, *sc.perturbation, data);
  sw.lap("setup");

  fdtd::FdtdProblem fp;
  fp.length = sc.length;
  fp.a = s.a;
  const auto grid = s.grid;
  fp.g = [g = data.g, grid](double x) { return interpolate_nodal(g, grid, x); };
  fp.h = [h = data.h, grid](double x) { return interpolate_nodal(h, grid, x); };
  fp.f = s.f;
  const std::size_t cells = sc.fdtd.cells > 0 ? sc.fdtd.cells : sc.n_cells;
  const double horizon = sc.fdtd.T > 0.0 ? sc.fdtd.T : sc.T;
  double a_max = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    a_max = std::max(a_max, s.a((static_cast<double>(i) + 0.5) * sc.length / static_cast<double>(cells)));
  }
  const auto cfg = fdtd::FdtdConfig::from_cfl(sc.length / static_cast<double>(cells), horizon, a_max, sc.fdtd.cfl,
                                              sc.fdtd.record_every);
  const auto fd = fdtd::fdtd_solve(fp, cfg);
  sw.lap("fdtd");
  const auto states = wave::solve(with_data(s, data), fd.times, s.M);
  sw.lap("modal");
  const auto cmp = compare(states, *s.basis, fd);
  sw.lap("compare");

  json doc = {{"scenario", sc.name},
              {"modes", s.M},
              {"fdtd", {{"cells", cells}, {"dx", fd.dx}, {"dt", fd.dt}, {"T", fd.times.back()}, {"cfl", sc.fdtd.cfl}}},
              {"max_l2_difference", cmp.max_l2_difference},
              {"worst_time", cmp.worst_time},
              {"shared_times", cmp.shared_times},
              {"tolerance", sc.fdtd.tolerance},
              {"pass", cmp.max_l2_difference <= sc.fdtd.tolerance}};
  CommandResult r;
  r.summary = doc;
  r.summary["command"] = "compare";
  detail_cmd::finish(r, sw, opt);
  r.files.emplace_back(sc.output_name("comparison", "comparison.json"), io::dump(doc));
  r.files.emplace_back(sc.output_name("fdtd_trajectory", "fdtd_trajectory.csv"), io::fdtd_csv(fd, *s.basis, s.M));
  return r;
}

}  // namespace wavedecay::scenario
