#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "latqed/bands.hpp"
#include "latqed/chain.hpp"
#include "latqed/config.hpp"
#include "latqed/csv.hpp"
#include "latqed/dynamics.hpp"
#include "latqed/error.hpp"
#include "latqed/manybody.hpp"
#include "latqed/oracles.hpp"
#include "latqed/parallel.hpp"
#include "latqed/spectral.hpp"
#include "latqed/version.hpp"

namespace latqed::scenario {

using config::ScenarioConfig;

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  // overrides the config value
  unsigned jobs = 1;
  std::function<void(const std::string&)> log;  // progress lines; may be empty
};

struct RunManifest {
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::string code_version;
  double wall_time_s = 0.0;
  std::vector<csv::WrittenFile> outputs;
  std::filesystem::path directory;
};

namespace detail {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline int as_int(const ScenarioConfig& c, const std::string& key) {
  const long long v = c.integer(key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(key + ": out of range");
  return static_cast<int>(v);
}

inline ChainModel make_chain(const ScenarioConfig& c) {
  return ChainModel::make(as_int(c, "chain.num_sites"), c.real("chain.spacing"), c.real("chain.mass"),
                          c.maybe_real("chain.hopping"));
}

inline PotentialSpec make_potential(const ScenarioConfig& c) {
  const auto& kind = c.text("potential.kind");
  if (kind == "woods_saxon")
    return WoodsSaxon{c.real("potential.depth"), c.real("potential.steepness"), c.real("potential.half_width")};
  if (kind == "delta") return DeltaSite{c.real("potential.strength"), as_int(c, "potential.site")};
  if (kind == "linear")
    return LinearField{c.real("potential.field"), as_int(c, "potential.first_site"),
                       as_int(c, "potential.last_site")};
  return ZeroPotential{};
}

inline RampShape ramp_shape(const ScenarioConfig& c) {
  return c.text("ramp.shape") == "linear" ? RampShape::Linear : RampShape::SmoothCos;
}

inline bands::BichromaticPotential make_lattice(const ScenarioConfig& c) {
  bands::BichromaticPotential p{c.real("lattice.W0"), c.real("lattice.dW"), c.real("lattice.k")};
  p.validate();
  return p;
}

// Uniform in [-1, 1) from raw generator bits, so the draws do not depend on
// the standard library's distribution implementation.
inline double symmetric_uniform(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

// Fixes the overall sign of a real profile: largest-magnitude entry positive.
inline void fix_sign(std::vector<double>& a, std::vector<double>& b) {
  double best = 0.0, sign = 1.0;
  for (const auto* v : {&a, &b})
    for (double x : *v)
      if (std::abs(x) > best + 1e-12) {
        best = std::abs(x);
        sign = x < 0 ? -1.0 : 1.0;
      }
  for (auto* v : {&a, &b})
    for (double& x : *v) x *= sign;
}

// ---------------------------------------------------------------------------

inline void run_spectrum(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions&) {
  const auto chain = make_chain(c);
  const auto h = build_hamiltonian(chain, sample_potential(make_potential(c), chain));
  const auto spectrum = spectral::solve_spectrum(h);

  csv::Table levels({"index", "energy"});
  for (Eigen::Index k = 0; k < spectrum.eigenvalues.size(); ++k) levels.row(static_cast<long long>(k), spectrum.eigenvalues[k]);
  out.write("spectrum.csv", levels);

  auto states = spectral::find_gap_states(spectrum, chain, c.real("output.edge_margin"));
  csv::Table bound({"index", "energy", "localization_length", "participation_ratio", "finite_size"});
  for (std::size_t i = 0; i < states.size(); ++i)
    bound.row(i, states[i].energy, states[i].localization_length, states[i].participation_ratio,
              states[i].finite_size);
  out.write("bound_states.csv", bound);

  if (c.flag("output.profiles"))
    for (std::size_t i = 0; i < states.size(); ++i) {
      auto& s = states[i];
      fix_sign(s.psi1, s.psi2);
      csv::Table prof({"site", "x", "psi1", "psi2"});
      for (std::size_t j = 0; j < s.psi1.size(); ++j) prof.row(j, s.cell_position[j], s.psi1[j], s.psi2[j]);
      out.write("profile_" + std::to_string(i) + ".csv", prof);
    }
}

inline void run_criticality(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions& opt) {
  const auto chain = make_chain(c);
  const double a = c.real("woods_saxon.steepness"), L = c.real("woods_saxon.half_width");
  const auto& grid = c.reals("scan.W_grid");
  const double margin = c.real("scan.edge_margin");
  const auto trace = spectral::trace_bound_state(chain, a, L, grid, margin, opt.jobs);

  csv::Table t({"W", "E0", "localized_flag"});
  for (std::size_t i = 0; i < trace.W_values.size(); ++i)
    t.row(trace.W_values[i], trace.E0_values[i], static_cast<bool>(trace.localized[i]));
  out.write("trace.csv", t);

  csv::KeyValue kv;
  double lo = nan, hi = nan;
  for (std::size_t i = 0; i + 1 < trace.W_values.size(); ++i)
    if (std::isfinite(trace.E0_values[i]) && !std::isfinite(trace.E0_values[i + 1])) {
      lo = trace.W_values[i];
      hi = trace.W_values[i + 1];
    }
  kv.add("W_cr_bracket_lo", lo);
  kv.add("W_cr_bracket_hi", hi);
  kv.add("W_cr_grid", trace.W_cr.value_or(nan));
  if (c.flag("scan.bisect"))
    kv.add("W_cr_bisect", spectral::find_critical_depth(chain, a, L, c.real("scan.W_max"), c.real("scan.tol"), margin));

  if (c.flag("oracle.enabled")) {
    const int points = as_int(c, "oracle.grid_points");
    const auto lowest = parallel_map<double>(grid.size(), opt.jobs, [&](std::size_t i) {
      const auto roots = oracles::solve_ws_bound_states({grid[i], a, L, chain.mass}, points, 1e-12);
      return roots.empty() ? nan : roots.front();
    });
    csv::Table o({"W", "E0_lattice", "E0_continuum", "abs_diff"});
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = std::abs(trace.E0_values[i] - lowest[i]);
      if (std::isfinite(d)) worst = std::max(worst, d);
      o.row(grid[i], trace.E0_values[i], lowest[i], d);
    }
    out.write("oracle.csv", o);
    kv.add("oracle_max_abs_diff", worst);
  }
  out.write("criticality.txt", kv.text());
}

inline void run_delta(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions& opt) {
  const auto chain = make_chain(c);
  int site = chain.num_sites / 2;
  if (site % 2 != 0) ++site;  // even sites carry +M
  if (c.has("delta.site")) site = as_int(c, "delta.site");
  const auto& phis = c.reals("delta.phi_values");

  struct Row { double lattice, cubic, continuum; };
  const auto rows = parallel_map<Row>(phis.size(), opt.jobs, [&](std::size_t i) {
    const double phi = phis[i];
    const auto h = build_hamiltonian(chain, sample_potential(DeltaSite{phi, site}, chain));
    const auto states = spectral::find_gap_states(h, chain);
    // the state bound to the defect carries the largest weight on its site
    double lattice = nan, weight = -1.0;
    for (const auto& s : states) {
      const double w = std::abs(site % 2 == 0 ? s.psi1[site / 2] : s.psi2[site / 2]);
      if (w > weight) {
        weight = w;
        lattice = s.energy;
      }
    }
    double cubic = nan;
    try {
      cubic = oracles::lattice_delta_energy(phi / chain.spacing, chain.mass, chain.hopping).lambda;
    } catch (const Error&) {
      // no bound state on this branch (repulsive +M site, or M = 0)
    }
    return Row{lattice, cubic, oracles::continuum_delta_energy(phi, chain.mass)};
  });

  csv::Table t({"phi", "lambda_lattice", "lambda_cubic", "lambda_continuum", "abs_diff"});
  for (std::size_t i = 0; i < phis.size(); ++i)
    t.row(phis[i], rows[i].lattice, rows[i].cubic, rows[i].continuum, std::abs(rows[i].lattice - rows[i].cubic));
  out.write("delta.csv", t);
}

inline void run_dynamics(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions&) {
  const auto chain = make_chain(c);
  RampProfile ramp{c.real("ramp.t_on"), c.real("ramp.t_plateau"), c.real("ramp.t_off"), ramp_shape(c)};
  ramp.validate();
  const dynamics::DrivenPotential pot{sample_potential(make_potential(c), chain), ramp};
  const auto s = dynamics::run_protocol(chain, pot, c.real("run.dt_factor"));

  csv::Table t({"n_pairs", "dominant_fraction", "dominant_entry", "unitarity_error", "norm_drift",
                "max_mode_occupation"});
  t.row(s.n_pairs, s.dominant_fraction, s.dominant_entry, s.unitarity_error, s.norm_drift, s.max_mode_occupation);
  out.write("dynamics.csv", t);
  if (c.flag("output.modes")) {
    csv::Table m({"mode", "occupation"});
    for (std::size_t k = 0; k < s.mode_spectrum.size(); ++k) m.row(k, s.mode_spectrum[k]);
    out.write("modes.csv", m);
  }
}

inline void run_adiabatic(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions& opt) {
  const auto chain = make_chain(c);
  const auto base = sample_potential(make_potential(c), chain);
  const auto rows = dynamics::adiabatic_scan(chain, base, c.reals("scan.durations"), c.real("scan.plateau"),
                                             ramp_shape(c), c.real("run.dt_factor"), opt.jobs);
  csv::Table t({"duration", "n_pairs", "dominant_fraction", "unitarity_error", "norm_drift"});
  for (const auto& r : rows)
    t.row(r.duration, r.summary.n_pairs, r.summary.dominant_fraction, r.summary.unitarity_error,
          r.summary.norm_drift);
  out.write("adiabatic.csv", t);
}

inline void run_schwinger(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions& opt) {
  const auto chain = make_chain(c);
  const auto scan = dynamics::schwinger_scan(
      chain, c.reals("field.values"), as_int(c, "field.first_site"), as_int(c, "field.last_site"),
      c.real("ramp.t_plateau"), c.real("ramp.t_on"), ramp_shape(c), c.real("run.dt_factor"), opt.jobs,
      c.real("fit.pair_floor"));
  csv::Table t({"E", "rate", "inv_E", "ln_rate", "n_pairs", "used_in_fit"});
  for (const auto& p : scan.points)
    t.row(p.field, p.rate, 1.0 / p.field, std::log(p.rate), p.n_pairs, p.used_in_fit);
  out.write("schwinger.csv", t);

  csv::KeyValue kv;
  const double reference = -std::numbers::pi * chain.mass * chain.mass;
  kv.add("fit_slope", scan.fit_slope);
  kv.add("fit_intercept", scan.fit_intercept);
  kv.add("r_squared", scan.r_squared);
  kv.add("fit_points", scan.fit_points);
  kv.add("continuum_slope", reference);
  kv.add("slope_ratio", reference != 0.0 ? scan.fit_slope / reference : nan);
  kv.add("rate_floor", scan.rate_floor);
  out.write("schwinger_fit.txt", kv.text());
}

inline void run_bands(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions& opt) {
  const auto pot = make_lattice(c);
  const auto grid = bands::zone_grid(pot, as_int(c, "bands.p_points"));
  const auto& source = c.text("bands.source");
  csv::Table t({"p", "E_minus", "E_plus", "source"});
  csv::KeyValue kv;

  auto describe = [&](const bands::BandStructure& b) {
    for (std::size_t j = 0; j < b.p.size(); ++j) t.row(b.p[j], b.E_minus[j], b.E_plus[j], bands::to_string(b.source));
    const std::string tag = bands::to_string(b.source);
    const auto fit = bands::effective_params(b);
    kv.add(tag + ".gap", b.gap());
    kv.add(tag + ".center", b.center());
    kv.add(tag + ".width", b.width());
    kv.add(tag + ".fit_J", fit.J);
    kv.add(tag + ".fit_M", fit.M);
    kv.add(tag + ".fit_rms", fit.rms_residual);
  };

  std::optional<bands::BandStructure> exact, wkb;
  if (source != "wkb") exact = bands::exact_bloch(pot, grid, as_int(c, "bands.n_planewaves"), opt.jobs);
  if (source != "exact") {
    try {
      wkb = bands::wkb_band_solve(pot, grid, opt.jobs);
    } catch (const RegimeError& e) {
      if (source == "wkb") throw;
      kv.add("wkb.status", std::string("unavailable: ") + e.what());
    }
  }
  if (exact) describe(*exact);
  if (wkb) describe(*wkb);
  if (exact && wkb) {
    const auto cmp = bands::compare_bands(*wkb, *exact);
    kv.add("wkb_vs_exact.gap_relative_error", cmp.gap_relative_error);
    kv.add("wkb_vs_exact.shape_rms", cmp.shape_rms);
  }
  kv.add("dW", pot.dW);
  out.write("bands.csv", t);
  out.write("bands.txt", kv.text());
}

inline void run_wannier(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions& opt) {
  const auto pot = make_lattice(c);
  const auto w = bands::compute_wannier(pot, as_int(c, "wannier.cells"), as_int(c, "wannier.n_planewaves"),
                                        as_int(c, "wannier.samples_per_site"), opt.jobs);
  csv::KeyValue kv;
  kv.add("M", w.M);
  kv.add("overlap_a", w.overlap_a);
  kv.add("overlap_b", w.overlap_b);
  kv.add("orthonormality", w.orthonormality);
  const std::pair<const char*, const bands::Orbital*> orbitals[] = {{"a", &w.a}, {"b", &w.b}, {"psi", &w.psi}, {"chi", &w.chi}};
  for (const auto& [name, orb] : orbitals) {
    csv::Table t({"x", "wannier_amplitude", "imag_part"});
    for (std::size_t i = 0; i < w.x.size(); ++i) t.row(w.x[i], orb->amplitude[i].real(), orb->amplitude[i].imag());
    out.write(std::string("wannier_") + name + ".csv", t);
    const std::string tag = name;
    kv.add(tag + ".center", orb->center);
    kv.add(tag + ".width", orb->width);
    kv.add(tag + ".decay_rate", orb->decay_rate);
    kv.add(tag + ".decay_r2", orb->decay_r2);
  }
  out.write("wannier.txt", kv.text());
}

inline void run_hierarchy(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions&) {
  const bands::PhysicalParams phys{c.real("units.E_R"), c.real("units.W0"), c.real("units.dW"),
                                   c.real("units.temperature"), c.real("hierarchy.ratio")};
  const auto r = bands::check_hierarchy(phys);
  csv::KeyValue kv;
  kv.add("units", c.text("units.name"));
  kv.add("J", r.J);
  kv.add("M", r.M);
  kv.add("omega_osc", r.omega_osc);
  kv.add("all_pass", r.all_pass());
  out.write("hierarchy.txt", kv.text());
  csv::Table t({"relation", "larger", "smaller", "ratio", "pass"});
  for (const auto& i : r.items) t.row(i.relation, i.larger, i.smaller, i.ratio, i.pass);
  out.write("hierarchy.csv", t);
}

inline void run_manybody(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions& opt) {
  using namespace manybody;
  const int L = as_int(c, "manybody.L");
  const int Np = c.has("manybody.particles") ? as_int(c, "manybody.particles") : L / 2;
  const double J = c.real("manybody.J"), M = c.real("manybody.mass"), w = c.real("manybody.disorder");
  const auto kind = c.text("manybody.statistics") == "hardcore_boson" ? OperatorKind::HardCoreBoseHopping
                                                                      : OperatorKind::FermiHopping;
  std::mt19937_64 rng(c.seed);
  std::vector<double> V(L);
  for (int n = 0; n < L; ++n) V[n] = (n % 2 == 0 ? M : -M) + w * symmetric_uniform(rng);

  const auto H = build_fock_hamiltonian(L, Np, J, V, kind, std::nullopt, opt.jobs);
  const auto occ = ground_state_occupations(H, 0);
  csv::Table d({"site", "density"});
  for (int n = 0; n < L; ++n) d.row(n, occ.densities[n]);
  out.write("densities.csv", d);
  csv::KeyValue kv;
  kv.add("energy", occ.energy);
  kv.add("gap", occ.gap);
  kv.add("upper_density", occ.upper_density);
  out.write("manybody.txt", kv.text());

  const auto& D0s = c.reals("interaction.D0_values");
  if (!D0s.empty()) {
    if (Np * 2 != L) throw ConfigError("interaction scan runs at half filling: particles must equal L/2");
    const auto rows = interaction_shift_scan(L, J, V, D0s, kind, as_int(c, "interaction.cutoff"), 0, opt.jobs);
    csv::Table t({"D0", "E0", "upper_density", "first_order_E0"});
    for (const auto& r : rows) t.row(r.D0, r.energy, r.upper_density, r.first_order_energy);
    out.write("interaction.csv", t);
  }
}

inline void run_jw(const ScenarioConfig& c, csv::OutputDir& out, const RunOptions& opt) {
  using namespace manybody;
  const auto& Ls = c.integers("jw.L_values");
  const int draws = as_int(c, "jw.draws");
  const double J = c.real("jw.J"), w = c.real("jw.disorder");
  for (auto L : Ls)
    if (L < 2 || L > 14) throw ConfigError("jw.L_values: each L must lie in [2, 14]");

  // Potentials are drawn serially so they do not depend on the job count.
  struct Task { int L; int draw; std::vector<double> V; };
  std::vector<Task> tasks;
  std::mt19937_64 rng(c.seed);
  for (auto L : Ls)
    for (int d = 0; d < draws; ++d) {
      std::vector<double> V(static_cast<std::size_t>(L));
      for (auto& v : V) v = w * symmetric_uniform(rng);
      tasks.push_back({static_cast<int>(L), d, std::move(V)});
    }

  struct Result { double jw = 0.0, subset = 0.0; };
  const auto results = parallel_map<Result>(tasks.size(), opt.jobs, [&](std::size_t i) {
    const auto& t = tasks[i];
    const auto e = spectral::eigenvalues(TridiagonalOperator{t.V, std::vector<double>(t.L - 1, -0.5 * J)});
    const std::vector<double> single(e.data(), e.data() + e.size());
    Result r;
    for (int Np = 1; Np < t.L; ++Np) {
      const auto f = full_spectrum(build_fock_hamiltonian(t.L, Np, J, t.V, OperatorKind::FermiHopping));
      const auto b = full_spectrum(build_fock_hamiltonian(t.L, Np, J, t.V, OperatorKind::HardCoreBoseHopping));
      r.jw = std::max(r.jw, (f - b).cwiseAbs().maxCoeff());
      const auto sums = subset_sums(single, Np);
      for (Eigen::Index k = 0; k < f.size(); ++k) r.subset = std::max(r.subset, std::abs(f[k] - sums[k]));
    }
    return r;
  });

  csv::Table t({"L", "draw", "jw_max_diff", "subset_sum_max_diff"});
  double jw = 0.0, subset = 0.0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    t.row(tasks[i].L, tasks[i].draw, results[i].jw, results[i].subset);
    jw = std::max(jw, results[i].jw);
    subset = std::max(subset, results[i].subset);
  }
  out.write("jw.csv", t);
  csv::KeyValue kv;
  kv.add("jw_max_diff", jw);
  kv.add("subset_sum_max_diff", subset);
  out.write("jw.txt", kv.text());
}

inline std::string hex32(std::uint32_t v) {
  char buf[9];
  static constexpr char digits[] = "0123456789abcdef";
  for (int i = 7; i >= 0; --i, v >>= 4) buf[i] = digits[v & 0xF];
  buf[8] = '\0';
  return buf;
}

}  // namespace detail

/// Runs one scenario, writes its outputs and finally manifest.txt.
inline RunManifest run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  csv::OutputDir out(opt.output_dir.value_or(std::filesystem::path(cfg.output_dir)));
  if (opt.log) opt.log("scenario " + std::string(config::to_string(cfg.scenario)) + " -> " + out.path().string());

  using config::Scenario;
  switch (cfg.scenario) {
    case Scenario::Spectrum: detail::run_spectrum(cfg, out, opt); break;
    case Scenario::Criticality: detail::run_criticality(cfg, out, opt); break;
    case Scenario::DeltaOracle: detail::run_delta(cfg, out, opt); break;
    case Scenario::Dynamics: detail::run_dynamics(cfg, out, opt); break;
    case Scenario::AdiabaticScan: detail::run_adiabatic(cfg, out, opt); break;
    case Scenario::SchwingerScan: detail::run_schwinger(cfg, out, opt); break;
    case Scenario::Bands: detail::run_bands(cfg, out, opt); break;
    case Scenario::Wannier: detail::run_wannier(cfg, out, opt); break;
    case Scenario::Hierarchy: detail::run_hierarchy(cfg, out, opt); break;
    case Scenario::ManyBody: detail::run_manybody(cfg, out, opt); break;
    case Scenario::JWCheck: detail::run_jw(cfg, out, opt); break;
  }

  RunManifest m;
  m.config_echo = cfg.echo;
  m.code_version = version;
  m.outputs = out.files();
  m.directory = out.path();
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::string text;
  text += "code_version = " + m.code_version + "\n";
  text += "wall_time_s = ";
  csv::append(text, m.wall_time_s);
  text += "\njobs = " + std::to_string(opt.jobs) + "\n";
  for (const auto& [k, v] : m.config_echo) text += "config." + k + " = " + v + "\n";
  for (const auto& f : m.outputs) {
    text += "output." + f.name + ".crc32 = " + detail::hex32(f.crc32) + "\n";
    text += "output." + f.name + ".bytes = " + std::to_string(f.bytes) + "\n";
  }
  const auto path = out.path() / "manifest.txt";
  std::ofstream mf(path, std::ios::binary | std::ios::trunc);
  if (!mf) throw ConfigError("cannot write " + path.string());
  mf << text;
  if (opt.log)
    for (const auto& f : m.outputs) opt.log("wrote " + f.name + " (crc32 " + detail::hex32(f.crc32) + ")");
  return m;
}

}  // namespace latqed::scenario
