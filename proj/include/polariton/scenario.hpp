#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "dispersion.hpp"
#include "io.hpp"
#include "spectral.hpp"
#include "wavepacket.hpp"

namespace pol {

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
double or_nan(F&& f) {
  try {
    return f();
  } catch (const Error&) {
    return kNaN;
  }
}

inline json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json params_summary(const ScenarioConfig& c, const PolaritonParams& p) {
  return {{"kind", kind_name(c.kind)},
          {"normalized",
           {{"fom", p.figure_of_merit()},
            {"omega_over_g", p.omega_c / p.g},
            {"omega_over_delta", p.omega_c / p.delta},
            {"gamma_over_delta", p.gamma / p.delta},
            {"gamma_r_over_delta", p.gamma_r / p.delta},
            {"light_shift", p.light_shift()},
            {"k_unit", p.k_unit()},
            {"v_g", p.vg()},
            {"c", p.c}}},
          {"physical", physical_summary(c)},
          {"closed_form_constant", closed_form_constant()}};
}

}  // namespace detail

inline json run_dispersion(const ScenarioConfig& c, io::OutputSet& out) {
  const auto p = normalized_params(c);
  io::CsvTable t({"k_bar", "omega_bar", "n", "method"});
  json gaps = json::object();
  auto row = [&](double kb, double w, int n, const char* m) {
    if (std::isfinite(w)) t.add_cells({io::fmt_double(kb), io::fmt_double(w), std::to_string(n), m});
  };
  for (double kb : c.k_bar) {
    const double K = p.k_from_bar(kb);
    double worst = 0;
    for (int n : c.branches) {
      const double we = detail::or_nan([&] { return p.omega_bar(coulomb_dispersion(p, K, n)); });
      const double ww = detail::or_nan([&] { return p.omega_bar(wkb_dispersion(p, K, n).omega); });
      const double wc = detail::or_nan([&] { return p.omega_bar(closed_form_omega(p, K, n)); });
      row(kb, we, n, "exact");
      row(kb, ww, n, "wkb");
      row(kb, wc, n, "closed_form");
      const double gap = std::abs(we - ww) / (1 + we);
      if (std::isfinite(gap)) worst = std::max(worst, gap);
    }
    gaps[io::fmt_double(kb)] = worst;
  }
  out.write_csv("dispersion.csv", t);
  json s = detail::params_summary(c, p);
  s["max_rel_gap"] = gaps;
  out.write_json("summary.json", s);
  return s;
}

inline json run_wkb_map(const ScenarioConfig& c, io::OutputSet& out) {
  const auto p = normalized_params(c);
  io::CsvTable t({"n", "k_bar", "omega_bar", "turning_point", "r0_over_rb", "phase_over_pi", "omega_bar_closed",
                  "v_closed_over_vg", "v_branch_over_vg"});
  io::CsvTable d({"k_bar", "omega_bar", "n", "method"});
  for (int n : c.branches) {
    for (double kb : c.k_bar) {
      const double K = p.k_from_bar(kb);
      double wb = detail::kNaN, tp = detail::kNaN, r0 = detail::kNaN, ph = detail::kNaN, vb = detail::kNaN;
      try {
        const auto s = wkb_dispersion(p, K, n);
        wb = p.omega_bar(s.omega);
        tp = s.variant == WkbVariant::turning_point ? 1 : 0;
        r0 = s.r0 / blockade_radius(p, s.omega);
        ph = s.phase_integral / std::numbers::pi;
        vb = detail::or_nan([&] { return wkb_branch_velocity(p, s.omega, n) / p.vg(); });
      } catch (const Error&) {
      }
      const double wc = detail::or_nan([&] { return p.omega_bar(closed_form_omega(p, K, n)); });
      const double vc = std::isfinite(wc) ? wkb_group_velocity(p, p.omega_from_bar(wc), n) / p.vg() : detail::kNaN;
      t.add({double(n), kb, wb, tp, r0, ph, wc, vc, vb});
      if (std::isfinite(wb)) d.add_cells({io::fmt_double(kb), io::fmt_double(wb), std::to_string(n), "wkb"});
      if (std::isfinite(wc)) d.add_cells({io::fmt_double(kb), io::fmt_double(wc), std::to_string(n), "closed_form"});
    }
  }
  out.write_csv("wkb_map.csv", t);
  out.write_csv("dispersion.csv", d);
  json s = detail::params_summary(c, p);
  out.write_json("summary.json", s);
  return s;
}

inline json run_decompose(const ScenarioConfig& c, io::OutputSet& out) {
  const auto p = normalized_params(c);
  io::CsvTable t({"k_bar", "n", "omega_bar", "density_bar"});
  json reports = json::array();
  for (double kb : c.k_bar) {
    const double K = p.k_from_bar(kb);
    for (int n : c.branches) {
      const auto r = decomposition_report(p, K, n, {}, c.cells, c.window);
      const double ls = p.light_shift();
      for (size_t i = 0; i < r.density.omegas.size(); ++i)
        t.add({kb, double(n), p.omega_bar(r.density.omegas[i]), r.density.density[i] * ls});
      const auto cs = make_coulomb_state(p, K, n);
      reports.push_back({{"k_bar", kb},
                         {"n", n},
                         {"omega_bar_n", p.omega_bar(r.omega_n)},
                         {"peak_omega_bar", p.omega_bar(r.peak_omega)},
                         {"peak_offset_cells", (r.peak_omega - r.omega_n) / r.d_omega},
                         {"fwhm_bar", r.fwhm / ls},
                         {"spacing_bar", r.spacing / ls},
                         {"fwhm_over_spacing", r.fwhm / r.spacing},
                         {"d_omega_bar", r.d_omega / ls},
                         {"total_weight", r.total_weight},
                         {"hf_velocity_over_c", hf_group_velocity(p, cs) / p.c}});
    }
  }
  out.write_csv("decomposition.csv", t);
  json s = detail::params_summary(c, p);
  s["reports"] = reports;
  out.write_json("decomposition.json", s);
  return s;
}

inline json run_potential(const ScenarioConfig& c, io::OutputSet& out) {
  const auto p = normalized_params(c);
  const double K = p.k_from_bar(c.k_bar.front());
  const auto q = effective_mass_energy(p, p.omega_from_bar(c.omega_bar), K, c.epsilon);
  io::CsvTable t({"r_over_rb", "v_re_over_w", "v_im_over_w"});
  for (int i = 0; i < c.points; ++i) {
    const double x = c.r_max * i / (c.points - 1);
    const cplx v = effective_potential(q, p, x * q.rb);
    t.add({x, v.real() / q.w, v.imag() / q.w});
  }
  out.write_csv("potential.csv", t);
  json s = detail::params_summary(c, p);
  s["effective_problem"] = {{"omega_bar", q.omega_bar}, {"k_bar", q.k_bar},       {"rb", q.rb},
                            {"w", q.w},                 {"mass", q.mass},         {"energy_over_w", q.eps_energy},
                            {"u", q.u},                 {"u_loc", q.u_loc},       {"lambda2", q.lambda2},
                            {"epsilon", q.epsilon},     {"repulsive_core", repulsive_core_predicate(p, q.omega, K)}};
  if (c.state_branch) {
    const auto cs = make_coulomb_state(p, K, *c.state_branch);
    const double a = cs.e.rb();
    io::CsvTable comp({"r_over_rb", "psi", "ee", "es_plus", "es_minus_im", "ss"});
    for (int i = 0; i < c.points; ++i) {
      const double r = c.r_max * a * i / (c.points - 1);
      const double ss = std::abs(r - a) < 1e-12 * a ? 0.0 : cs.ss(r);
      comp.add({r / a, cs.psi(r), cs.e.coeffs.sigma_ee * cs.psi(r), cs.psi(r), -cs.e.coeffs.es_minus * cs.dpsi(r), ss});
    }
    out.write_csv("components.csv", comp);
    s["coulomb_state"] = {{"n", *c.state_branch},
                          {"omega_bar", p.omega_bar(cs.e.omega)},
                          {"rb", a},
                          {"norm2", cs.norm2},
                          {"hf_velocity_over_c", hf_group_velocity(p, cs) / p.c}};
  }
  out.write_json("summary.json", s);
  return s;
}

namespace detail {

inline std::string snapshot_csv(const TwoExcitationField& f, double carrier_k, int stride) {
  io::CsvTable t({"z", "zp", "ee_re", "ee_im", "es_re", "es_im", "se_re", "se_im", "ss_re", "ss_im"});
  const double h = f.h();
  for (int i = 0; i < f.n(); i += stride) {
    for (int j = f.jmin(); j <= f.jmax(); ++j) {
      const int ip = i - j;
      if (!f.inside(i, j) || ((ip % stride) + stride) % stride != 0) continue;
      const int ipw = f.periodic() ? f.mod(ip) : ip;
      const cplx ph = std::polar(1.0, carrier_k * 0.5 * (i + ipw) * h);
      std::vector<double> row{i * h, ipw * h};
      for (auto comp : {EE, ES, SE, SS}) {
        const cplx v = f.at(comp, i, j) * ph;
        row.push_back(v.real());
        row.push_back(v.imag());
      }
      t.add(row);
    }
  }
  return t.str();
}

inline json snapshot_json(const TwoExcitationField& f, double carrier_k, int stride) {
  std::map<std::string, std::vector<double>> cols;
  const double h = f.h();
  const char* names[] = {"ee", "es", "se", "ss"};
  for (int i = 0; i < f.n(); i += stride) {
    for (int j = f.jmin(); j <= f.jmax(); ++j) {
      const int ip = i - j;
      if (!f.inside(i, j) || ((ip % stride) + stride) % stride != 0) continue;
      const int ipw = f.periodic() ? f.mod(ip) : ip;
      const cplx ph = std::polar(1.0, carrier_k * 0.5 * (i + ipw) * h);
      cols["z"].push_back(i * h);
      cols["zp"].push_back(ipw * h);
      for (int k = 0; k < 4; ++k) {
        const cplx v = f.at(static_cast<Comp>(k), i, j) * ph;
        cols[std::string(names[k]) + "_re"].push_back(v.real());
        cols[std::string(names[k]) + "_im"].push_back(v.imag());
      }
    }
  }
  json j = {{"t", f.t}, {"h", h}};
  for (auto& [k, v] : cols) j[k] = v;
  return j;
}

}  // namespace detail

struct EvolveResult {
  PolaritonParams params;
  double t_final = 0;
  double carrier_k_bar = 0;
  double dropped_weight = 0;
  std::vector<TrackPoint> track;
  VelocityFit fit;
  double v_branch = 0, v_closed = 0;
  std::vector<PeakMetric> peaks;  // one per snapshot fraction
  std::vector<double> snapshot_times;
  std::vector<EeSnapshot> snapshots;
  std::vector<double> times, norms;  // every observation
  double final_norm = 0, cut_norm = 0, exit_norm = 0;
};

// Runs the configured wavepacket evolution. out may be null (no files written).
inline EvolveResult evolve_scenario(const ScenarioConfig& c, io::OutputSet* out) {
  const auto& e = c.evolve;
  EvolveResult res;
  const auto p = normalized_params(c);
  res.params = p;
  const double h = 1.0 / e.resolution, len = e.length;
  const int n = static_cast<int>(std::lround(len / h));
  const double w0 = p.omega_c * p.omega_c / p.delta;
  double tf = e.t_final;
  if (e.t_final_unit == "delta_over_omega2") tf *= p.delta / (p.omega_c * p.omega_c);
  if (e.t_final_unit == "L_over_vg") tf *= len / p.vg();
  if (e.t_final_unit == "inverse_delta") tf /= p.delta;
  res.t_final = tf;

  TwoExcitationField f(n, h, band_cells(e.cutoff, h, n));
  VariationalSpec vs;
  vs.n = e.branch;
  vs.sigma = e.sigma_factor * w0 / 2;
  vs.omega_center = p.omega_from_bar(e.omega_center_bar);
  vs.half_window = e.half_window;
  vs.nodes = e.nodes;
  vs.r_center = e.r_center * len;
  const auto vr = variational_ss(vs, p, f);
  res.carrier_k_bar = p.k_bar(vr.carrier_k);
  res.dropped_weight = vr.dropped_weight;
  res.v_branch = detail::or_nan([&] { return wkb_branch_velocity(p, vs.omega_center, e.branch); });
  res.v_closed = wkb_group_velocity(p, vs.omega_center, e.branch);

  EvolutionConfig cfg;
  cfg.tau = h / p.c;
  cfg.t_final = tf;
  cfg.cutoff_radius = e.cutoff;
  cfg.absorb_width = e.absorb_width;
  cfg.carrier_k = vr.carrier_k;
  cfg.v_cap = e.v_cap_factor * p.light_shift();
  const Propagator prop(p, cfg, f);

  // observation times on the step lattice
  std::vector<long> steps;
  for (int k = 1; k <= e.track_points; ++k) steps.push_back(std::lround(tf * k / e.track_points / cfg.tau));
  std::vector<long> snap_steps;
  for (double s : e.snapshots) snap_steps.push_back(std::lround(tf * s / cfg.tau));
  steps.insert(steps.end(), snap_steps.begin(), snap_steps.end());
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  std::vector<double> times;
  for (long s : steps) times.push_back(s * cfg.tau);

  io::CsvTable ts({"t", "t_over_tf", "norm", "norm_ee", "norm_es", "norm_se", "norm_ss", "cut", "exit", "r_peak"});
  std::vector<EeSnapshot> track_snaps;
  std::map<long, int> snap_index;
  for (size_t k = 0; k < snap_steps.size(); ++k) snap_index.emplace(snap_steps[k], static_cast<int>(k));
  res.peaks.resize(e.snapshots.size());
  res.snapshot_times.resize(e.snapshots.size());
  res.snapshots.resize(e.snapshots.size());

  evolve(f, prop, times, [&](const TwoExcitationField& g) {
    const long step = std::lround(g.t / cfg.tau);
    auto snap = take_snapshot(g);
    const double rp = detail::or_nan([&] { return peak_position(snap, 1.0); });
    res.times.push_back(g.t);
    res.norms.push_back(g.norm2());
    ts.add({g.t, g.t / tf, g.norm2(), g.norm2(EE), g.norm2(ES), g.norm2(SE), g.norm2(SS), g.cut_norm, g.exit_norm, rp});
    for (auto [s, k] : snap_index) {
      if (s != step) continue;
      res.peaks[k] = detect_double_peak(snap, e.peak_window);
      res.snapshot_times[k] = g.t;
      res.snapshots[k] = snap;
      if (out) {
        const std::string base = "snapshot_" + std::to_string(k);
        if (c.snapshot_format == "csv")
          out->write(base + ".csv", detail::snapshot_csv(g, vr.carrier_k, e.snapshot_stride));
        else
          out->write_json_gz(base + ".json.gz", detail::snapshot_json(g, vr.carrier_k, e.snapshot_stride));
      }
    }
    track_snaps.push_back(std::move(snap));
  });
  res.final_norm = f.norm2();
  res.cut_norm = f.cut_norm;
  res.exit_norm = f.exit_norm;

  const auto full = track_peaks(track_snaps, 1.0, e.transient * tf);
  for (const auto& q : full)
    if (q.t >= e.fit_window[0] * tf * (1 - 1e-9) && q.t <= e.fit_window[1] * tf * (1 + 1e-9)) res.track.push_back(q);
  res.fit = extract_velocity(res.track);

  if (out) {
    out->write_csv("timeseries.csv", ts);
    io::CsvTable tr({"t", "t_over_L_vg", "r_peak"});
    for (const auto& q : full) tr.add({q.t, q.t * p.vg() / len, q.r_peak});
    out->write_csv("track.csv", tr);
    json peaks = json::array();
    for (size_t k = 0; k < res.peaks.size(); ++k) {
      const auto& m = res.peaks[k];
      peaks.push_back({{"t", res.snapshot_times[k]},
                       {"t_over_tf", res.snapshot_times[k] / tf},
                       {"maxima", m.maxima},
                       {"positions", m.positions},
                       {"dip_ratio", m.dip_ratio},
                       {"top_position", m.top_position},
                       {"r", m.r},
                       {"marginal", m.marginal}});
    }
    out->write_json("double_peak.json", {{"peak_window", e.peak_window}, {"snapshots", peaks}});
    json s = detail::params_summary(c, p);
    s["evolution"] = {{"t_final", tf},
                      {"tau", cfg.tau},
                      {"grid_cells", n},
                      {"band_cells", f.jmax()},
                      {"carrier_k_bar", res.carrier_k_bar},
                      {"dropped_weight", res.dropped_weight},
                      {"final_norm", res.final_norm},
                      {"cut_norm", res.cut_norm},
                      {"exit_norm", res.exit_norm}};
    s["velocity"] = {{"slope_over_vg", res.fit.slope / p.vg()},
                     {"stderr_over_vg", res.fit.stderr_slope / p.vg()},
                     {"residual_ratio", res.fit.residual_ratio},
                     {"fit_window", e.fit_window},
                     {"predicted_branch_over_vg", detail::nan_to_null(res.v_branch / p.vg())},
                     {"predicted_closed_over_vg", res.v_closed / p.vg()}};
    out->write_json("velocity.json", s);
    io::CsvTable v({"n", "slope_over_vg", "stderr_over_vg", "residual_ratio", "predicted_branch_over_vg",
                    "predicted_closed_over_vg"});
    v.add({double(e.branch), res.fit.slope / p.vg(), res.fit.stderr_slope / p.vg(), res.fit.residual_ratio,
           res.v_branch / p.vg(), res.v_closed / p.vg()});
    out->write_csv("velocity.csv", v);
  }
  return res;
}

inline json run_scenario(const ScenarioConfig& c, io::OutputSet& out) {
  switch (c.kind) {
    case ScenarioKind::dispersion: return run_dispersion(c, out);
    case ScenarioKind::wkb_map: return run_wkb_map(c, out);
    case ScenarioKind::decompose: return run_decompose(c, out);
    case ScenarioKind::potential_profile: return run_potential(c, out);
    case ScenarioKind::evolve: {
      const auto r = evolve_scenario(c, &out);
      return {{"slope_over_vg", r.fit.slope / r.params.vg()}};
    }
  }
  return {};
}

}  // namespace pol
