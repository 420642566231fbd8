#pragma once

// File formats: CSV inputs (forcing, coefficient, space-time forcing,
// initial data), CSV trajectories and JSON documents for bases, synthesis
// results and verdicts. All writes go through write_atomic.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "wavedecay/decay_synthesis.hpp"
#include "wavedecay/eigensolver.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/fdtd.hpp"
#include "wavedecay/oracle_compare.hpp"
#include "wavedecay/oscillator.hpp"
#include "wavedecay/signal.hpp"
#include "wavedecay/wave_solver.hpp"

namespace wavedecay::io {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

namespace detail_csv {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last || !std::isfinite(v)) {
    throw PreconditionError(where + ": not a finite number: '" + s + "'");
  }
  return v;
}

}  // namespace detail_csv

/// Comma-separated numbers with one header line. Blank lines and lines
/// starting with '#' are skipped. Every row must have the header's width.
inline CsvTable parse_csv(const std::string& text, const std::string& source = "csv") {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    auto cells = detail_csv::split(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    const std::string where = source + ":" + std::to_string(lineno);
    if (cells.size() != t.header.size()) {
      throw PreconditionError(where + ": expected " + std::to_string(t.header.size()) + " columns, got " +
                              std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) row[j] = detail_csv::parse_number(cells[j], where);
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw PreconditionError(source + ": empty file");
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path), path.string()); }

namespace detail_csv {

inline std::vector<double> column(const CsvTable& t, std::size_t j) {
  std::vector<double> c(t.rows.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = t.rows[k][j];
  return c;
}

/// Linear interpolation of (x, y) at the nodes of `grid`; x must be
/// increasing and span the domain.
inline std::vector<double> onto_grid(const std::vector<double>& x, const std::vector<double>& y, const Grid1D& grid,
                                     const std::string& what) {
  wavedecay::detail::require(x.size() >= 2, what + ": need at least two sample points");
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    wavedecay::detail::require(x[i + 1] > x[i], what + ": x coordinates must be strictly increasing");
  }
  const double tol = 1e-9 * grid.length;
  wavedecay::detail::require(x.front() <= tol && x.back() >= grid.length - tol,
                             what + ": samples do not span [0, length]");
  std::vector<double> out(grid.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double xi = grid.node(i);
    auto k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xi) - x.begin());
    k = std::clamp<std::size_t>(k, 1, x.size() - 1) - 1;
    const double w = std::clamp((xi - x[k]) / (x[k + 1] - x[k]), 0.0, 1.0);
    out[i] = (1.0 - w) * y[k] + w * y[k + 1];
  }
  return out;
}

}  // namespace detail_csv

/// Columns (time, value).
inline SampledSignal read_forcing_csv(const std::filesystem::path& path, TailPolicy tail) {
  const auto t = read_csv(path);
  detail::require(t.header.size() == 2, path.string() + ": forcing CSV needs columns time,value");
  return SampledSignal(detail_csv::column(t, 0), detail_csv::column(t, 1), std::move(tail));
}

/// Columns (x, a); interpolated to the cell midpoints of `grid`.
inline CoefficientField read_coefficient_csv(const std::filesystem::path& path, const Grid1D& grid) {
  const auto t = read_csv(path);
  detail::require(t.header.size() == 2, path.string() + ": coefficient CSV needs columns x,a");
  detail::require(!t.rows.empty(), path.string() + ": no coefficient samples");
  return CoefficientField::from_samples(grid, detail_csv::column(t, 0), detail_csv::column(t, 1));
}

/// Header row: a label followed by node coordinates; each further row is
/// t followed by the forcing at those coordinates. Values are interpolated
/// onto the grid nodes when the coordinates differ.
inline wave::SpaceTimeField read_space_time_csv(const std::filesystem::path& path, const Grid1D& grid) {
  const std::string text = read_text(path);
  const auto first_line = text.substr(0, text.find('\n'));
  auto coords_txt = detail_csv::split(first_line);
  detail::require(coords_txt.size() >= 3, path.string() + ": header needs a label and at least two coordinates");
  std::vector<double> x;
  for (std::size_t j = 1; j < coords_txt.size(); ++j) {
    x.push_back(detail_csv::parse_number(coords_txt[j], path.string() + ":1"));
  }
  const auto t = parse_csv(text, path.string());
  wave::SpaceTimeField f{{}, grid.node_count(), {}};
  for (const auto& row : t.rows) {
    f.times.push_back(row[0]);
    const auto on_grid = detail_csv::onto_grid(x, std::vector<double>(row.begin() + 1, row.end()), grid,
                                               path.string());
    f.values.insert(f.values.end(), on_grid.begin(), on_grid.end());
  }
  return f;
}

struct InitialData {
  std::vector<double> g;
  std::vector<double> h;
};

/// Columns (x, g, h), interpolated onto the grid nodes.
inline InitialData read_initial_data_csv(const std::filesystem::path& path, const Grid1D& grid) {
  const auto t = read_csv(path);
  detail::require(t.header.size() == 3, path.string() + ": initial data CSV needs columns x,g,h");
  const auto x = detail_csv::column(t, 0);
  return {detail_csv::onto_grid(x, detail_csv::column(t, 1), grid, path.string()),
          detail_csv::onto_grid(x, detail_csv::column(t, 2), grid, path.string())};
}

// ---------------------------------------------------------------------------
// CSV output

inline std::string oscillator_csv(const oscillator::Trajectory& tr) {
  std::string s = "time,y,yprime\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    s += format_double(tr.times[k]) + ',' + format_double(tr.y[k]) + ',' + format_double(tr.yprime[k]) + '\n';
  }
  return s;
}

namespace detail_csv {

inline std::string trajectory_header(std::size_t M) {
  std::string s = "t,l2_norm,energy";
  for (std::size_t m = 1; m <= M; ++m) s += ",d_" + std::to_string(m);
  return s + '\n';
}

}  // namespace detail_csv

/// t, l2_norm, energy, d_1..d_M.
inline std::string trajectory_csv(std::span<const wave::SpectralState> states, std::span<const double> eigenvalues) {
  const std::size_t M = states.empty() ? 0 : states.front().d.size();
  std::string s = detail_csv::trajectory_header(M);
  for (const auto& st : states) {
    s += format_double(st.t) + ',' + format_double(wave::l2_norm(st)) + ',' +
         format_double(wave::energy(st, eigenvalues));
    for (double d : st.d) s += ',' + format_double(d);
    s += '\n';
  }
  return s;
}

/// FDTD trajectory in the modal schema: l2_norm and energy are the grid
/// quantities, d_m the projections of each snapshot onto the first M modes.
inline std::string fdtd_csv(const fdtd::GridTrajectory& tr, const EigenBasis& basis, std::size_t M) {
  detail::require(M <= basis.count(), "fdtd_csv: more modes requested than the basis holds");
  std::string s = detail_csv::trajectory_header(M);
  const auto xs = basis.grid.nodes();
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const auto& u = tr.snapshots[k];
    std::vector<double> on_basis(xs.size());
    const Grid1D fd_grid(tr.length, u.size() - 1);
    for (std::size_t i = 0; i < xs.size(); ++i) on_basis[i] = interpolate_nodal(u, fd_grid, xs[i]);
    const auto d = wave::project(on_basis, basis, M);
    s += format_double(tr.times[k]) + ',' + format_double(fdtd::GridTrajectory::l2_norm(u, tr.dx)) + ',' +
         format_double(tr.energies[k]);
    for (double v : d) s += ',' + format_double(v);
    s += '\n';
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON documents

inline const char* source_name(BasisSource s) { return s == BasisSource::Analytic ? "analytic" : "fem"; }

inline json basis_to_json(const EigenBasis& b, const CoefficientField* coeff = nullptr) {
  json j;
  j["schema"] = 1;
  j["source"] = source_name(b.source);
  j["grid"] = {{"length", b.grid.length}, {"n_cells", b.grid.n_cells}};
  if (b.source == BasisSource::Analytic) j["a_const"] = b.a_const;
  if (coeff != nullptr) j["coefficient_midpoints"] = coeff->midpoint_values;
  j["lambda"] = b.eigenvalues;
  j["modes"] = b.modes;
  return j;
}

/// Inverse of basis_to_json. FEM bases need the coefficient midpoints to
/// rebuild the mass and stiffness matrices.
inline EigenBasis basis_from_json(const json& j) {
  try {
    detail::require(j.at("schema").get<int>() == 1, "basis JSON: unsupported schema");
    const Grid1D grid(j.at("grid").at("length").get<double>(), j.at("grid").at("n_cells").get<std::size_t>());
    EigenBasis b;
    b.grid = grid;
    b.eigenvalues = j.at("lambda").get<std::vector<double>>();
    b.modes = j.at("modes").get<std::vector<std::vector<double>>>();
    detail::require(b.modes.size() == b.eigenvalues.size() && !b.modes.empty(), "basis JSON: lambda/modes mismatch");
    for (const auto& m : b.modes) detail::require(m.size() == grid.node_count(), "basis JSON: mode length mismatch");
    const auto source = j.at("source").get<std::string>();
    if (source == "analytic") {
      b.source = BasisSource::Analytic;
      b.a_const = j.at("a_const").get<double>();
      b.stiffness = assemble_fem(grid, CoefficientField::constant(grid, b.a_const)).stiffness;
      b.mass = SymTridiagonal(grid.interior_count());
      std::fill(b.mass.diag.begin(), b.mass.diag.end(), grid.spacing());
    } else if (source == "fem") {
      b.source = BasisSource::FEM;
      CoefficientField c{j.at("coefficient_midpoints").get<std::vector<double>>()};
      detail::require(c.midpoint_values.size() == grid.n_cells, "basis JSON: coefficient length mismatch");
      auto fem = assemble_fem(grid, c);
      b.stiffness = std::move(fem.stiffness);
      b.mass = std::move(fem.mass);
    } else {
      throw PreconditionError("basis JSON: unknown source '" + source + "'");
    }
    return b;
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("basis JSON: ") + e.what());
  }
}

inline json synthesis_to_json(const decay::SynthesisResult& r) {
  json j;
  j["g_m"] = r.g_m;
  j["h_m"] = r.h_m;
  j["sums"] = {{"sum_h2", r.sum_h2},
               {"sum_lambda_g2", r.sum_lambda_g2},
               {"minkowski_bound", r.minkowski_bound},
               {"summable", r.summable()}};
  if (r.unresolved_forcing >= 0.0) j["sums"]["unresolved_forcing"] = r.unresolved_forcing;
  j["tails"] = r.tail_residuals;
  j["tails_rigorous"] = r.tails_rigorous;
  return j;
}

inline json verdict_to_json(const decay::DecayVerdict& v) {
  return {{"decays", v.decays},
          {"sup_tail", v.sup_tail},
          {"window", {v.window.start, v.window.end}},
          {"threshold", v.threshold}};
}

inline std::string dump(const json& j) { return j.dump(2) + '\n'; }

}  // namespace wavedecay::io
