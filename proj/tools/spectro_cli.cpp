#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectro/coherence.hpp"
#include "spectro/config.hpp"
#include "spectro/constants.hpp"
#include "spectro/echo.hpp"
#include "spectro/errors.hpp"
#include "spectro/fit.hpp"
#include "spectro/models.hpp"
#include "spectro/optical.hpp"
#include "spectro/report.hpp"
#include "spectro/reproduce.hpp"
#include "spectro/resonator.hpp"
#include "spectro/spin_anisotropy.hpp"
#include "spectro/svg.hpp"
#include "spectro/table.hpp"

namespace {

using namespace spectro;

// ---- shared plumbing -------------------------------------------------------

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve_config(const GlobalOpts& g) {
  RunConfig cfg = RunConfig::from_path_or_env(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

// "start:stop:step" -> inclusive grid
std::vector<double> parse_range(const std::string& text) {
  double a = 0, b = 0, s = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &a, &b, &s, &extra) != 3)
    throw ValidationError("range '" + text + "' must be start:stop:step");
  if (s <= 0) throw ValidationError("range '" + text + "': step must be > 0");
  if (b < a) throw ValidationError("range '" + text + "': stop must be >= start");
  std::vector<double> out;
  const double n_est = (b - a) / s;
  if (n_est > 10e6) throw ValidationError("range '" + text + "' has too many points");
  for (int k = 0;; ++k) {
    const double v = a + s * k;
    if (v > b + 1e-9 * s) break;
    out.push_back(v);
  }
  return out;
}

void emit_text(const std::string& out_path, const std::string& body) {
  if (out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw ValidationError("cannot open output file '" + out_path + "'");
  f << body;
  if (!f) throw ValidationError("failed writing '" + out_path + "'");
}

void finish_report(const std::string& out_path, const json& j) {
  emit_text(out_path, dump_report(j));
}

std::string csv_text(const std::vector<std::string>& headers,
                     const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream s;
  for (std::size_t i = 0; i < headers.size(); ++i) s << (i ? "," : "") << headers[i];
  s << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << r[i];
    s << "\n";
  }
  return s.str();
}

// first non-comment line of a file (for header-based schema auto-detection)
std::string peek_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    if (line[b] == '#') continue;
    return line;
  }
  throw ValidationError(path + ": no header row found");
}

TiltParams tilt_from_config(const RunConfig& cfg) {
  TiltParams t;
  t.dphi1_deg = cfg.get("spin", "tilt_dphi1_deg");
  t.dphi2_deg = cfg.get("spin", "tilt_dphi2_deg");
  t.theta0_deg = cfg.get("spin", "tilt_theta0_deg");
  t.sign = cfg.get("spin", "tilt_sign");
  return t;
}

int fit_exit_code(const FitResult& r) { return r.converged ? 0 : 3; }

// nudge a data-derived initial guess off the bounds so the fit transform is well posed
double clamp_inside(double v, double lo, double hi) {
  const double pad = 1e-9 * (hi - lo);
  return std::min(std::max(v, lo + pad), hi - pad);
}

// ---- angle-map -------------------------------------------------------------

int cmd_angle_map(const GlobalOpts& g, double freq, const std::string& theta_range,
                  const std::string& site, bool no_tilt, const std::string& out_path,
                  const std::string& plot_path) {
  const RunConfig cfg = resolve_config(g);
  const double f = freq > 0 ? freq : cfg.get("resonator", "f0_hz");
  TiltParams tilt = tilt_from_config(cfg);
  if (no_tilt) tilt = TiltParams{};
  const double reg = cfg.get("spin", "theta_reg_deg");

  std::vector<SubSiteOrbit> orbits;
  if (site == "c2" || site == "both")
    orbits.push_back(SubSiteOrbit::c2(cfg.get("spin", "c2_g1"), cfg.get("spin", "c2_g2"),
                                      cfg.get("spin", "c2_g3"), cfg.get("spin", "c2_psi_deg"),
                                      reg));
  if (site == "c3i" || site == "both")
    orbits.push_back(
        SubSiteOrbit::c3i(cfg.get("spin", "c3i_g_perp"), cfg.get("spin", "c3i_g_par"), reg));
  if (orbits.empty())
    throw ValidationError("--site must be c2, c3i, or both (got '" + site + "')");

  const std::vector<double> grid = parse_range(theta_range);
  std::vector<AngleMapRow> rows;
  for (const auto& orbit : orbits) {
    auto part = angle_map(orbit, f, grid, tilt);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::stable_sort(rows.begin(), rows.end(), [](const AngleMapRow& a, const AngleMapRow& b) {
    if (a.theta_deg != b.theta_deg) return a.theta_deg < b.theta_deg;
    return a.sub_site_id < b.sub_site_id;
  });

  std::vector<std::vector<std::string>> cells;
  cells.reserve(rows.size());
  for (const auto& r : rows)
    cells.push_back({format_sig(r.theta_deg), r.sub_site_id, format_sig(r.b_res_T * 1e3)});
  emit_text(out_path, csv_text({"theta_deg", "sub_site_id", "b_res_mT"}, cells));

  if (!plot_path.empty()) {
    // one series per sub-site
    std::vector<Series> series;
    for (const auto& orbit : orbits)
      for (const auto& m : orbit.members) {
        Series s;
        s.label = m.id;
        for (const auto& r : rows)
          if (r.sub_site_id == m.id) {
            s.x.push_back(r.theta_deg);
            s.y.push_back(r.b_res_T * 1e3);
          }
        series.push_back(std::move(s));
      }
    PlotSpec ps;
    ps.title = "Resonance field vs in-plane angle";
    ps.x_label = "theta (deg)";
    ps.y_label = "B_res (mT)";
    emit_plot(plot_path, ps, series);
  }
  return 0;
}

// ---- s21-fit ---------------------------------------------------------------

int cmd_s21_fit(const GlobalOpts& g, const std::string& input, bool no_asymmetry,
                const std::string& out_path, const std::string& plot_path) {
  const RunConfig cfg = resolve_config(g);
  const std::string header = peek_header(input);
  std::string hl = header;
  std::transform(hl.begin(), hl.end(), hl.begin(), ::tolower);
  const bool polar = hl.find("s21_mag_db") != std::string::npos;

  TableSchema schema;
  if (polar)
    schema = {"s21_polar",
              {{"frequency", Unit::Hertz}, {"s21_mag_db"}, {"s21_phase_rad"}}};
  else
    schema = {"s21_cartesian", {{"frequency", Unit::Hertz}, {"s21_real"}, {"s21_imag"}}};
  const MeasurementTable t = load_table(input, schema);

  const auto& freq = t.col("frequency");
  std::vector<double> mag(t.rows);
  if (polar) {
    const auto& db = t.col("s21_mag_db");
    for (std::size_t i = 0; i < t.rows; ++i) mag[i] = std::pow(10.0, db[i] / 20.0);
  } else {
    const auto& re = t.col("s21_real");
    const auto& im = t.col("s21_imag");
    for (std::size_t i = 0; i < t.rows; ++i) mag[i] = std::hypot(re[i], im[i]);
  }

  // initial guesses from the resonance dip
  std::size_t imin = 0;
  double fmin = freq[0], fmax = freq[0];
  for (std::size_t i = 0; i < t.rows; ++i) {
    if (mag[i] < mag[imin]) imin = i;
    fmin = std::min(fmin, freq[i]);
    fmax = std::max(fmax, freq[i]);
  }
  const double f0_init = freq[imin];
  const double depth = std::max(mag[imin], 1e-6);
  // half-depth crossing width -> loaded Q
  const double half = 0.5 * (1.0 + depth);
  double f_lo = fmin, f_hi = fmax;
  for (std::size_t i = imin; i-- > 0;)
    if (mag[i] > half) {
      f_lo = freq[i];
      break;
    }
  for (std::size_t i = imin + 1; i < t.rows; ++i)
    if (mag[i] > half) {
      f_hi = freq[i];
      break;
    }
  const double fwhm = std::max(f_hi - f_lo, (fmax - fmin) / t.rows);
  const double ql = f0_init / fwhm;
  const double qi_init = ql / depth;
  const double qe_init = qi_init / std::max(1.0 / depth - 1.0, 1e-3);

  FitProblem p;
  p.model = models::make("s21_mag");
  p.x = freq;
  p.y = mag;
  p.data_digest = t.source_digest;
  p.init = {clamp_inside(f0_init, fmin, fmax), std::min(std::max(qi_init, 11.0), 1e8),
            std::min(std::max(qe_init, 1.1), 1e8), no_asymmetry ? 1e12 : 1e4};
  p.lo = {fmin, 10.0, 1.0, no_asymmetry ? 1e11 : 10.0};
  p.hi = {fmax, 1e9, 1e9, 1e13};
  const FitResult r = fit(p);

  json rep = report_header("s21-fit", cfg);
  rep["fit"] = fit_report(r, p.model);
  const double qi_f = r.params[1], qe_f = r.params[2];
  rep["derived"]["loaded_q"] =
      quantity(1.0 / (1.0 / qi_f + 1.0 / qe_f), "", "resonator.s21", "1/QL = 1/Qi + 1/Qe");
  rep["derived"]["resonance_depth"] =
      quantity(1.0 / (1.0 + qi_f / qe_f), "", "resonator.s21", "|S21| at resonance, symmetric part");
  finish_report(out_path, rep);

  if (!plot_path.empty()) {
    Series data{"data", freq, mag, ""};
    Series model{"fit", freq, {}, ""};
    model.y.resize(t.rows);
    for (std::size_t i = 0; i < t.rows; ++i) model.y[i] = p.model.eval(r.params, &freq[i]);
    PlotSpec ps;
    ps.title = "S21 magnitude fit";
    ps.x_label = "frequency (Hz)";
    ps.y_label = "|S21|";
    emit_plot(plot_path, ps, {data, model});
  }
  return fit_exit_code(r);
}

// ---- spin-signature --------------------------------------------------------

int cmd_spin_signature(const GlobalOpts& g, const std::string& input,
                       const std::string& b_range, const std::string& out_path,
                       const std::string& report_path, const std::string& plot_path) {
  const RunConfig cfg = resolve_config(g);
  SpinEnsemble ens;
  ens.Omega_ens_hz = cfg.get("ensemble", "omega_ens_hz");
  ens.gamma_s_hz = cfg.get("ensemble", "gamma_s_hz");
  ens.g_eff = cfg.get("ensemble", "g_eff");
  ens.B0_T = cfg.get("ensemble", "b0_t");
  ens.g_single_hz = cfg.get("ensemble", "g_single_hz");
  ens.volume_m3 = cfg.get("ensemble", "volume_m3");

  json rep = report_header("spin-signature", cfg);
  std::string digest = "none";
  std::vector<double> b_grid;

  if (!input.empty()) {
    TableSchema schema{"field_sweep",
                       {{"b_field", Unit::Tesla}, {"delta_kappa", Unit::Hertz},
                        {"delta_f", Unit::Hertz}}};
    const MeasurementTable t = load_table(input, schema);
    digest = t.source_digest;
    b_grid = t.col("b_field");
    // fit the absorptive signature for (Omega_ens, gamma_s, B0)
    FitModel m;
    m.name = "spin_signature_kappa";
    m.param_names = {"omega_ens_hz", "gamma_s_hz", "b0_t"};
    const double g_eff = ens.g_eff, g_single = ens.g_single_hz, vol = ens.volume_m3;
    m.eval = [g_eff, g_single, vol](const std::vector<double>& prm, const double* x) {
      SpinEnsemble e;
      e.Omega_ens_hz = prm[0];
      e.gamma_s_hz = prm[1];
      e.B0_T = prm[2];
      e.g_eff = g_eff;
      e.g_single_hz = g_single;
      e.volume_m3 = vol;
      return spin_signature(x[0], e).delta_kappa_hz;
    };
    const auto& dk = t.col("delta_kappa");
    std::size_t ipk = 0;
    for (std::size_t i = 0; i < t.rows; ++i)
      if (dk[i] > dk[ipk]) ipk = i;
    FitProblem p;
    p.model = m;
    p.x = b_grid;
    p.y = dk;
    p.data_digest = digest;
    const double bmin = *std::min_element(b_grid.begin(), b_grid.end());
    const double bmax = *std::max_element(b_grid.begin(), b_grid.end());
    p.init = {std::sqrt(std::max(dk[ipk], 1.0) * ens.gamma_s_hz), ens.gamma_s_hz,
              clamp_inside(b_grid[ipk], bmin, bmax)};
    p.lo = {1.0, 1.0, bmin};
    p.hi = {1e12, 1e12, bmax};
    const FitResult r = fit(p);
    rep["fit"] = fit_report(r, m);
    ens.Omega_ens_hz = r.params[0];
    ens.gamma_s_hz = r.params[1];
    ens.B0_T = r.params[2];
    const double N = ensemble_to_count(ens.Omega_ens_hz, ens.g_single_hz);
    const Density d = count_to_density(N, ens.volume_m3, constants::n_yttrium);
    rep["derived"]["coupled_spins"] =
        quantity(N, "spins", "resonator.ensemble_to_count", "N = (Omega_ens/g_single)^2");
    rep["derived"]["density_ppm"] =
        quantity(d.ppm, "ppm", "resonator.count_to_density", "relative to host cation density");
    if (!r.converged) {
      finish_report(report_path, rep);
      return 3;
    }
  } else {
    b_grid = parse_range(!b_range.empty()
                             ? b_range
                             : (std::to_string(ens.B0_T - 0.01) + ":" +
                                std::to_string(ens.B0_T + 0.01) + ":" + std::to_string(2e-4)));
  }

  const SpinSignature peak = spin_signature(ens.B0_T, ens);
  rep["derived"]["peak_delta_kappa"] =
      quantity(peak.delta_kappa_hz, "Hz", "resonator.spin_signature",
               "Omega_ens^2/gamma_s on resonance");
  rep["input_digest"] = digest;

  std::vector<std::vector<std::string>> cells;
  std::vector<double> dk_model(b_grid.size()), df_model(b_grid.size());
  for (std::size_t i = 0; i < b_grid.size(); ++i) {
    const SpinSignature s = spin_signature(b_grid[i], ens);
    dk_model[i] = s.delta_kappa_hz;
    df_model[i] = s.delta_f_hz;
    cells.push_back({format_sig(b_grid[i]), format_sig(s.delta_kappa_hz),
                     format_sig(s.delta_f_hz)});
  }
  if (!out_path.empty())
    emit_text(out_path, csv_text({"b_field_t", "delta_kappa_hz", "delta_f_hz"}, cells));
  finish_report(report_path, rep);

  if (!plot_path.empty()) {
    PlotSpec ps;
    ps.title = "Spin signature vs field";
    ps.x_label = "B (T)";
    ps.y_label = "shift (Hz)";
    emit_plot(plot_path, ps,
              {Series{"delta_kappa", b_grid, dk_model, ""},
               Series{"delta_f", b_grid, df_model, ""}});
  }
  return 0;
}

// ---- decay-fit -------------------------------------------------------------

int cmd_decay_fit(const GlobalOpts& g, const std::string& input, const std::string& model_name,
                  const std::string& out_path, const std::string& plot_path) {
  const RunConfig cfg = resolve_config(g);
  if (model_name != "stretched_exp" && model_name != "sat_recovery")
    throw ValidationError("--model must be stretched_exp or sat_recovery (got '" + model_name +
                          "')");
  TableSchema schema{"decay",
                     {{"delay", Unit::Seconds}, {"amplitude"},
                      {"amplitude_err", Unit::None, /*optional=*/true}}};
  const MeasurementTable t = load_table(input, schema);
  const auto& x = t.col("delay");
  const auto& y = t.col("amplitude");

  double ymax = y[0], tmax = x[0], tmin = x[0];
  for (std::size_t i = 0; i < t.rows; ++i) {
    ymax = std::max(ymax, std::abs(y[i]));
    tmax = std::max(tmax, x[i]);
    tmin = std::min(tmin, x[i]);
  }
  // time where the data first drops below A0/e, as the decay-scale guess
  double tscale = 0.5 * (tmin + tmax);
  for (std::size_t i = 0; i < t.rows; ++i)
    if (std::abs(y[i]) < ymax / M_E) {
      tscale = std::max(x[i], tmin + 0.05 * (tmax - tmin));
      break;
    }

  FitProblem p;
  p.model = models::make(model_name);
  p.x = x;
  p.y = y;
  if (t.has("amplitude_err")) p.yerr = t.col("amplitude_err");
  p.data_digest = t.source_digest;
  if (model_name == "stretched_exp") {
    p.init = {ymax, 2.0 * tscale, 1.5};
    p.lo = {0.0, tmin > 0 ? tmin / 10 : 1e-9, 0.3};
    p.hi = {10.0 * ymax, 100.0 * tmax, 5.0};
  } else {
    p.init = {ymax, tscale};
    p.lo = {0.0, tmin > 0 ? tmin / 10 : 1e-9};
    p.hi = {10.0 * ymax, 100.0 * tmax};
  }
  const FitResult r = fit(p);

  json rep = report_header("decay-fit", cfg);
  rep["fit"] = fit_report(r, p.model);
  if (model_name == "stretched_exp") {
    rep["derived"]["t2"] = quantity(r.params[1], "s", "coherence.hahn_decay",
                                    "A(t) = A0 exp(-(2t/T2)^n), t = pulse delay");
    rep["derived"]["stretch_n"] =
        quantity(r.params[2], "", "coherence.hahn_decay", "stretch exponent");
  } else {
    rep["derived"]["t1"] =
        quantity(r.params[1], "s", "fit.sat_recovery", "A(t) = A0 (1 - e^{-t/T1})");
  }
  finish_report(out_path, rep);

  if (!plot_path.empty()) {
    Series data{"data", x, y, ""};
    Series curve{"fit", x, {}, ""};
    curve.y.resize(t.rows);
    for (std::size_t i = 0; i < t.rows; ++i) curve.y[i] = p.model.eval(r.params, &x[i]);
    PlotSpec ps;
    ps.title = "Decay fit (" + model_name + ")";
    ps.x_label = "delay (s)";
    ps.y_label = "amplitude";
    emit_plot(plot_path, ps, {data, curve});
  }
  return fit_exit_code(r);
}

// ---- sd-map ----------------------------------------------------------------

int cmd_sd_map(const GlobalOpts& g, const std::string& input, double t1_s,
               const std::string& out_path, const std::string& plot_path) {
  const RunConfig cfg = resolve_config(g);
  const double t1 = t1_s > 0 ? t1_s : cfg.get("spectral_diffusion", "t1_s");
  TableSchema schema{"stimulated_echo",
                     {{"tau", Unit::Seconds}, {"tw", Unit::Seconds}, {"amplitude"}}};
  const MeasurementTable t = load_table(input, schema);
  const auto& tau = t.col("tau");
  const auto& tw = t.col("tw");
  const auto& amp = t.col("amplitude");

  FitProblem p;
  p.model = models::make("stimulated_echo", {{"t1_s", t1}});
  p.x.resize(2 * t.rows);
  for (std::size_t i = 0; i < t.rows; ++i) {
    p.x[2 * i] = tau[i];
    p.x[2 * i + 1] = tw[i];
  }
  p.y = amp;
  p.data_digest = t.source_digest;
  double a0 = 0;
  for (double v : amp) a0 = std::max(a0, std::abs(v));
  p.init = {a0, 1e3, 5e3, 100.0};
  p.lo = {0.0, 0.0, 1.0, 0.01};
  p.hi = {10.0 * a0, 1e6, 1e7, 1e6};
  const FitResult r = fit(p);

  json rep = report_header("sd-map", cfg);
  rep["fit"] = fit_report(r, p.model);
  const double gamma_sd = r.params[2], rate = r.params[3];
  SpectralDiffusionModel sd{r.params[1], gamma_sd, rate, t1};
  rep["derived"]["sd_limited_t2"] =
      quantity(sd_limited_T2(gamma_sd, rate), "s", "coherence.sd_limited_T2",
               "T2 = 2/sqrt(pi Gamma_SD R)");
  rep["derived"]["effective_linewidth_tau0_tw10ms"] =
      quantity(effective_linewidth(0.0, 10e-3, sd), "Hz", "coherence.effective_linewidth",
               "Gamma_eff at tau->0, TW = 10 ms");
  rep["fixed"]["t1"] = quantity(t1, "s", "coherence.stimulated_echo", "population lifetime");
  finish_report(out_path, rep);

  if (!plot_path.empty()) {
    // group by distinct tau values, model curves vs TW
    std::vector<double> taus_unique;
    for (double v : tau)
      if (std::find(taus_unique.begin(), taus_unique.end(), v) == taus_unique.end())
        taus_unique.push_back(v);
    std::sort(taus_unique.begin(), taus_unique.end());
    std::vector<Series> series;
    for (double tv : taus_unique) {
      Series s;
      s.label = "tau=" + format_sig(tv * 1e6) + "us";
      for (std::size_t i = 0; i < t.rows; ++i)
        if (tau[i] == tv) {
          s.x.push_back(tw[i]);
          s.y.push_back(amp[i]);
        }
      series.push_back(std::move(s));
    }
    PlotSpec ps;
    ps.title = "Stimulated-echo decay";
    ps.x_label = "wait time (s)";
    ps.y_label = "amplitude";
    ps.log_x = true;
    emit_plot(plot_path, ps, series);
  }
  return fit_exit_code(r);
}

// ---- noise-budget ----------------------------------------------------------

int cmd_noise_budget(const GlobalOpts& g, double t2_hahn, double t2_cpmg, double g_eff,
                     const std::string& out_path) {
  const RunConfig cfg = resolve_config(g);
  const double th = t2_hahn > 0 ? t2_hahn : cfg.get("coherence", "t2_hot_s");
  const double tc = t2_cpmg > 0 ? t2_cpmg : cfg.get("coherence", "t2_cold_s");
  const double ge = g_eff > 0 ? g_eff : cfg.get("ensemble", "g_eff");
  const NoiseBudgetDetail nb = noise_budget_detail(th, tc, ge);

  json rep = report_header("noise-budget", cfg);
  rep["inputs"]["t2_hahn"] = quantity(th, "s", "coherence.noise_budget", "");
  rep["inputs"]["t2_cpmg"] = quantity(tc, "s", "coherence.noise_budget", "");
  rep["inputs"]["g_eff"] = quantity(ge, "", "coherence.noise_budget", "");
  rep["results"]["delta_b"] = quantity(
      nb.delta_B_T * 1e9, "nT", "coherence.noise_budget",
      "(1/(pi T2_hahn) - 1/(pi T2_cpmg)) / (g mu_B/h); decoupling-residual rate in the pi "
      "convention");
  rep["results"]["delta_b_literal"] = quantity(
      nb.delta_B_literal_T * 1e9, "nT", "coherence.noise_budget",
      "literal 1/T2_cpmg residual-rate variant, reported alongside (negative here means the "
      "subtraction overshoots)");
  rep["results"]["sensitivity"] =
      quantity(nb.sensitivity_hz_per_T, "Hz/T", "coherence.noise_budget", "S1 = g mu_B / h");
  if (nb.ordering_warning)
    rep["results"]["warning"] = "T2_hahn exceeds T2_cpmg; decoupling made coherence worse";
  finish_report(out_path, rep);
  return 0;
}

// ---- tls-fit ---------------------------------------------------------------

int cmd_tls_fit(const GlobalOpts& g, const std::string& input, const std::string& out_path,
                const std::string& plot_path) {
  const RunConfig cfg = resolve_config(g);
  TableSchema schema{"tls", {{"n_photons"}, {"qi"}, {"qi_err", Unit::None, true}}};
  const MeasurementTable t = load_table(input, schema);
  const auto& n = t.col("n_photons");
  const auto& qi = t.col("qi");

  double qmax = qi[0], qmin = qi[0], nmin = n[0], nmax = n[0];
  for (std::size_t i = 0; i < t.rows; ++i) {
    qmax = std::max(qmax, qi[i]);
    qmin = std::min(qmin, qi[i]);
    nmin = std::min(nmin, n[i]);
    nmax = std::max(nmax, n[i]);
  }
  if (nmin <= 0) throw ValidationError("tls-fit: photon numbers must be > 0");

  FitProblem p;
  p.model = models::make("tls_q");
  p.x = n;
  p.y = qi;
  if (t.has("qi_err")) p.yerr = t.col("qi_err");
  p.data_digest = t.source_digest;
  const double qi0_init = qmax * 1.02;
  const double ftd_init = std::max(1.0 / qmin - 1.0 / qi0_init, 1e-8);
  p.init = {qi0_init, ftd_init, std::sqrt(nmin * nmax), 0.5};
  p.lo = {qmin, 1e-9, nmin / 100, 0.05};
  p.hi = {100.0 * qmax, 1.0, nmax * 100, 2.0};
  const FitResult r = fit(p);

  json rep = report_header("tls-fit", cfg);
  rep["fit"] = fit_report(r, p.model);
  ResonatorModel rm;
  rm.Qi = 1;
  rm.Qe = 1;
  rm.tls = {r.params[0], r.params[1], r.params[2], r.params[3]};
  rep["derived"]["qi_single_photon"] =
      quantity(tls_quality(1e-9, rm), "", "resonator.tls_quality",
               "low-power limit 1/(1/Qi0 + F tan delta)");
  finish_report(out_path, rep);

  if (!plot_path.empty()) {
    Series data{"data", n, qi, ""};
    Series curve{"fit", n, {}, ""};
    curve.y.resize(t.rows);
    for (std::size_t i = 0; i < t.rows; ++i) curve.y[i] = p.model.eval(r.params, &n[i]);
    PlotSpec ps;
    ps.title = "TLS-limited internal quality factor";
    ps.x_label = "intracavity photons";
    ps.y_label = "Qi";
    ps.log_x = true;
    emit_plot(plot_path, ps, {data, curve});
  }
  return fit_exit_code(r);
}

// ---- purcell ---------------------------------------------------------------

int cmd_purcell(const GlobalOpts& g, const std::string& out_path,
                const std::string& plot_path) {
  const RunConfig cfg = resolve_config(g);
  const double tau0 = cfg.get("optical", "tau0_s");
  const double tau_cav = cfg.get("optical", "tau_cav_s");
  const double zeta = cfg.get("optical", "zeta");
  OpticalCavityModel cav;
  cav.Q = cfg.get("optical", "q");
  cav.lambda_m = cfg.get("optical", "lambda_m");
  cav.refractive_n = cfg.get("optical", "refractive_n");
  cav.gamma_cav_hz = cfg.get("optical", "f_a_hz") / cav.Q;
  cav.branching_zeta = zeta;

  const double FP = purcell_factor(tau0, tau_cav, zeta);
  const double chi = local_field_correction(cav.refractive_n);
  const ModeVolume vm = mode_volume_from_purcell(FP, cav);
  const SingleEmitterCoupling g0 = g0_from_mode_volume(
      cfg.get("optical", "mu_cm"), cav.refractive_n,
      2 * M_PI * cfg.get("optical", "f_a_hz"), vm.m3);

  json rep = report_header("purcell", cfg);
  rep["results"]["purcell_factor"] = quantity(FP, "", "optical.purcell_factor",
                                              "FP = (tau0/tau_cav - 1)/zeta");
  rep["results"]["local_field_correction"] =
      quantity(chi, "", "optical.local_field_correction", "chi_L = 3n^2/(2n^2+1)");
  rep["results"]["mode_volume"] = quantity(vm.lambda_n_units, "(lambda/n)^3",
                                           "optical.mode_volume_from_purcell",
                                           "Vm = 3 Q lambda^3/(4 pi^2 chi_L^2 n^3 FP)");
  rep["results"]["mode_volume_abs"] =
      quantity(vm.m3, "m^3", "optical.mode_volume_from_purcell", "");
  rep["results"]["g0"] = quantity(
      g0.literal_per_s / (2 * M_PI), "Hz", "optical.g0_from_mode_volume",
      "(mu/n) sqrt(omega_a/(2 hbar eps0 Vm)) / 2pi, literal evaluation");
  rep["results"]["g0_half_convention"] = quantity(
      g0.half_per_s / (2 * M_PI), "Hz", "optical.g0_from_mode_volume",
      "half of the literal value; reported alongside because quoted couplings follow this "
      "convention");
  rep["results"]["t1_on_resonance"] =
      quantity(purcell_t1_vs_detuning(0.0, tau0, zeta, FP, cav.gamma_cav_hz), "s",
               "optical.purcell_t1_vs_detuning", "");
  rep["results"]["t1_far_detuned"] =
      quantity(purcell_t1_vs_detuning(1e15, tau0, zeta, FP, cav.gamma_cav_hz), "s",
               "optical.purcell_t1_vs_detuning", "tau0/(1-zeta) limit");
  finish_report(out_path, rep);

  if (!plot_path.empty()) {
    Series s{"T1(detuning)", {}, {}, ""};
    const double span = 3.0 * cav.gamma_cav_hz;
    for (int i = 0; i <= 400; ++i) {
      const double d = -span + 2 * span * i / 400.0;
      s.x.push_back(d);
      s.y.push_back(purcell_t1_vs_detuning(d, tau0, zeta, FP, cav.gamma_cav_hz));
    }
    PlotSpec ps;
    ps.title = "Purcell-shortened lifetime vs detuning";
    ps.x_label = "detuning (Hz)";
    ps.y_label = "T1 (s)";
    emit_plot(plot_path, ps, {s});
  }
  return 0;
}

// ---- holeburn --------------------------------------------------------------

int cmd_holeburn(const GlobalOpts& g, const std::string& mode, const std::string& input,
                 double t1_s, double t_bath, const std::string& out_path,
                 const std::string& plot_path) {
  const RunConfig cfg = resolve_config(g);
  json rep = report_header("holeburn", cfg);
  FitResult r;
  FitModel model;
  std::vector<double> x, y, curve;

  if (mode == "power") {
    const double t1 = t1_s > 0 ? t1_s : cfg.get("optical", "t1_s");
    TableSchema schema{"hole_power",
                       {{"rabi_rad_s"}, {"gamma", Unit::Hertz},
                        {"gamma_err", Unit::Hertz, true}}};
    const MeasurementTable t = load_table(input, schema);
    x = t.col("rabi_rad_s");
    y = t.col("gamma");
    FitProblem p;
    model = models::make("power_broadening", {{"t1_s", t1}});
    p.model = model;
    p.x = x;
    p.y = y;
    if (t.has("gamma_err")) p.yerr = t.col("gamma_err");
    p.data_digest = t.source_digest;
    double gmin = y[0];
    for (double v : y) gmin = std::min(gmin, v);
    p.init = {clamp_inside(1.0 / (M_PI * std::max(gmin, 1.0)), 1e-9, 10.0)};
    p.lo = {1e-9};
    p.hi = {10.0};
    r = fit(p);
    rep["fit"] = fit_report(r, model);
    rep["fixed"]["t1"] = quantity(t1, "s", "optical.bloch_linewidth", "lifetime held fixed");
    rep["derived"]["zero_drive_linewidth"] =
        quantity(bloch_linewidth(0.0, t1, r.params[0]), "Hz", "optical.bloch_linewidth",
                 "1/(pi T2*)");
  } else if (mode == "field") {
    const double T = t_bath > 0 ? t_bath : cfg.get("holeburn", "t_bath_k");
    TableSchema schema{"hole_field", {{"b_field", Unit::Tesla}, {"gamma", Unit::Hertz}}};
    const MeasurementTable t = load_table(input, schema);
    x = t.col("b_field");
    y = t.col("gamma");
    FitProblem p;
    model = models::make("holeburn_b", {{"t_bath_k", T}});
    p.model = model;
    p.x = x;
    p.y = y;
    p.data_digest = t.source_digest;
    double gmin = y[0], gmax = y[0];
    for (double v : y) {
      gmin = std::min(gmin, v);
      gmax = std::max(gmax, v);
    }
    p.init = {gmin, std::max(gmax - gmin, 1.0), 2.0};
    p.lo = {0.0, 0.0, 0.05};
    p.hi = {10.0 * gmax, 100.0 * gmax, 20.0};
    r = fit(p);
    rep["fit"] = fit_report(r, model);
    rep["fixed"]["t_bath"] = quantity(T, "K", "optical.holeburn_B_model", "bath temperature");
    OpticalLinewidthModel m;
    m.Gamma0_opt_hz = r.params[0];
    m.Gamma_SD_opt_hz = r.params[1];
    m.g_env = r.params[2];
    m.T_bath_K = T;
    rep["derived"]["zero_field_linewidth"] = quantity(
        holeburn_B_model(0.0, m), "Hz", "optical.holeburn_B_model", "Gamma0 + Gamma_SD");
    rep["derived"]["frozen_bath_linewidth"] =
        quantity(r.params[0], "Hz", "optical.holeburn_B_model", "high-field limit Gamma0");
  } else {
    throw ValidationError("--mode must be power or field (got '" + mode + "')");
  }

  finish_report(out_path, rep);
  if (!plot_path.empty()) {
    curve.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) curve[i] = model.eval(r.params, &x[i]);
    PlotSpec ps;
    ps.title = "Hole linewidth fit (" + mode + ")";
    ps.x_label = mode == "power" ? "Rabi frequency (rad/s)" : "B (T)";
    ps.y_label = "linewidth (Hz)";
    emit_plot(plot_path, ps, {Series{"data", x, y, ""}, Series{"fit", x, curve, ""}});
  }
  return fit_exit_code(r);
}

// ---- echo-process ----------------------------------------------------------

int cmd_echo_process(const GlobalOpts& g, const std::string& input, bool synth,
                     double window_s, double band_center, double band_width,
                     double bg_width, const std::string& out_path,
                     const std::string& report_path) {
  const RunConfig cfg = resolve_config(g);
  const double win = window_s > 0 ? window_s : cfg.get("echo", "window_s");
  const double bc = band_center > 0 ? band_center : cfg.get("echo", "center_f_hz");
  const double bw = band_width > 0 ? band_width : cfg.get("echo", "band_width_hz");
  const double bg = bg_width > 0 ? bg_width : cfg.get("echo", "bg_bin_width_hz");

  QuadratureTrace trace;
  std::string trace_id;
  if (synth) {
    trace = synth_echo(cfg.get("echo", "center_f_hz"), cfg.get("echo", "amplitude"),
                       cfg.get("echo", "envelope_sigma_s"), cfg.get("echo", "noise_rms"),
                       cfg.get("echo", "duration_s"), cfg.get("echo", "sample_rate_hz"),
                       cfg.seed);
    trace_id = "synth-seed-" + std::to_string(cfg.seed);
  } else {
    if (input.empty())
      throw ValidationError("echo-process needs --input TRACE.csv or --synth");
    TableSchema schema{"trace", {{"time", Unit::Seconds}, {"i_volts"}, {"q_volts"}}};
    const MeasurementTable t = load_table(input, schema);
    const auto& time = t.col("time");
    if (t.rows < 2) throw ValidationError("trace needs at least 2 samples");
    const double dt = time[1] - time[0];
    if (dt <= 0) throw ValidationError("trace time axis must be increasing");
    for (std::size_t i = 1; i < t.rows; ++i)
      if (std::abs((time[i] - time[i - 1]) - dt) > 1e-6 * dt)
        throw ValidationError("trace must be uniformly sampled (gap at row " +
                              std::to_string(i + 1) + ")");
    trace.sample_rate_hz = 1.0 / dt;
    trace.i_samples = t.col("i_volts");
    trace.q_samples = t.col("q_volts");
    trace_id = t.source_digest;
  }

  const EchoArea area = echo_area(trace, win, bc, bw, bg);
  const double pedestal = std::hypot(area.i_pedestal, area.q_pedestal);
  emit_text(out_path,
            csv_text({"trace_id", "echo_area", "pedestal_area"},
                     {{trace_id, format_sig(area.combined, 9), format_sig(pedestal, 9)}}));
  if (!report_path.empty()) {
    json rep = report_header("echo-process", cfg);
    rep["trace_id"] = trace_id;
    rep["results"]["echo_area"] =
        quantity(area.combined, "V/sample*Hz", "echo.echo_area",
                 "quadrature-combined band integral minus pedestal");
    rep["results"]["i_area"] = quantity(area.i_area, "", "echo.echo_area", "signed");
    rep["results"]["q_area"] = quantity(area.q_area, "", "echo.echo_area", "signed");
    rep["results"]["pedestal_area"] = quantity(pedestal, "", "echo.echo_area", "");
    rep["settings"]["window"] = quantity(win, "s", "echo.echo_area", "");
    rep["settings"]["band_center"] = quantity(bc, "Hz", "echo.echo_area", "");
    rep["settings"]["band_width"] = quantity(bw, "Hz", "echo.echo_area", "");
    rep["settings"]["bg_bin_width"] = quantity(bg, "Hz", "echo.echo_area", "");
    finish_report(report_path, rep);
  }
  return 0;
}

// ---- reproduce -------------------------------------------------------------

int cmd_reproduce(const GlobalOpts& g, bool all, const std::string& out_path) {
  const RunConfig cfg = resolve_config(g);
  const ReproduceOutcome outcome = run_reproduce(cfg, all);

  for (const auto& r : outcome.rows) {
    std::string line = r.pass ? "[PASS] " : "[FAIL] ";
    line += r.id + "  " + r.name + ": value " + format_sig(r.value, 7);
    if (!r.unit.empty()) line += " " + r.unit;
    switch (r.cmp) {
      case Cmp::RelTol:
        line += " vs " + format_sig(r.expected, 7) + " (tol " + format_sig(r.tol * 100, 3) + "%)";
        break;
      case Cmp::AbsTol:
        line += " vs " + format_sig(r.expected, 7) + " (tol +-" + format_sig(r.tol, 3) + ")";
        break;
      case Cmp::Band:
        line += " in [" + format_sig(r.lo, 4) + ", " + format_sig(r.hi, 4) + "]";
        break;
      case Cmp::AtLeast:
        line += " >= " + format_sig(r.expected, 4);
        break;
      case Cmp::AtMost:
        line += " <= " + format_sig(r.expected, 4);
        break;
    }
    if (r.documented && !r.pass) line += "  [documented divergence]";
    std::cout << line << "\n";
  }
  int failed = 0, documented = 0;
  for (const auto& r : outcome.rows) {
    if (!r.pass && r.documented) ++documented;
    if (!r.pass && !r.documented) ++failed;
  }
  std::cout << outcome.rows.size() << " checks: " << (outcome.rows.size() - failed - documented)
            << " passed, " << failed << " failed, " << documented
            << " documented divergences\n";

  if (!out_path.empty()) {
    json rep = report_header("reproduce", cfg);
    rep["acceptance"] = outcome.to_json();
    write_report(out_path, rep);
  }
  return outcome.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spectro: spin-resonance spectroscopy modeling and fitting toolkit\n"
      "Exit codes: 0 success, 1 failed reproduce checks, 2 invalid input, 3 fit "
      "non-convergence."};
  app.require_subcommand(1);
  app.fallthrough(true);

  GlobalOpts g;
  app.add_option("--config", g.config_path,
                 "INI config path (default: $SPECTROKIT_CONFIG, else built-in defaults)");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "RNG seed override");

  // angle-map
  auto* am = app.add_subcommand("angle-map", "Resonance field vs in-plane angle per sub-site");
  double am_freq = 0;
  std::string am_theta = "0:360:1", am_site = "both", am_out, am_plot;
  bool am_no_tilt = false;
  am->add_option("--freq", am_freq, "microwave frequency, Hz (default: config resonator f0)");
  am->add_option("--theta", am_theta, "angle grid start:stop:step, deg");
  am->add_option("--site", am_site, "c2, c3i, or both");
  am->add_flag("--no-tilt", am_no_tilt, "disable the out-of-plane tilt model");
  am->add_option("--out", am_out, "output CSV path (default: stdout)");
  am->add_option("--plot", am_plot, "SVG plot path");

  // s21-fit
  auto* sf = app.add_subcommand("s21-fit", "Fit resonator |S21(f)| for f0, Qi, Qe, asymmetry");
  std::string sf_in, sf_out, sf_plot;
  bool sf_nosym = false;
  sf->add_option("--input", sf_in, "CSV: frequency_hz,s21_real,s21_imag or "
                                   "frequency_hz,s21_mag_db,s21_phase_rad")
      ->required();
  sf->add_flag("--no-asymmetry", sf_nosym, "pin the asymmetry parameter to (effectively) none");
  sf->add_option("--out", sf_out, "report JSON path (default: stdout)");
  sf->add_option("--plot", sf_plot, "SVG plot path");

  // spin-signature
  auto* ss = app.add_subcommand("spin-signature",
                                "Spin-induced resonator broadening/pull vs field");
  std::string ss_in, ss_b, ss_out, ss_rep, ss_plot;
  ss->add_option("--input", ss_in, "field sweep CSV: b_field_t,delta_kappa_hz,delta_f_hz "
                                   "(fits the ensemble parameters)");
  ss->add_option("--b-range", ss_b, "field grid start:stop:step, tesla (model mode)");
  ss->add_option("--out", ss_out, "model curve CSV path");
  ss->add_option("--report", ss_rep, "report JSON path (default: stdout)");
  ss->add_option("--plot", ss_plot, "SVG plot path");

  // decay-fit
  auto* df = app.add_subcommand("decay-fit", "Fit echo decay or saturation recovery");
  std::string df_in, df_model = "stretched_exp", df_out, df_plot;
  df->add_option("--input", df_in, "CSV: delay_s,amplitude[,amplitude_err]")->required();
  df->add_option("--model", df_model, "stretched_exp (default) or sat_recovery");
  df->add_option("--out", df_out, "report JSON path (default: stdout)");
  df->add_option("--plot", df_plot, "SVG plot path");

  // sd-map
  auto* sm = app.add_subcommand("sd-map", "Fit the stimulated-echo spectral-diffusion surface");
  std::string sm_in, sm_out, sm_plot;
  double sm_t1 = 0;
  sm->add_option("--input", sm_in, "CSV: tau_s,tw_s,amplitude")->required();
  sm->add_option("--t1", sm_t1, "population lifetime held fixed, s (default: config)");
  sm->add_option("--out", sm_out, "report JSON path (default: stdout)");
  sm->add_option("--plot", sm_plot, "SVG plot path");

  // noise-budget
  auto* nbud = app.add_subcommand("noise-budget",
                                  "Residual magnetic noise from Hahn vs decoupled T2");
  double nb_th = 0, nb_tc = 0, nb_g = 0;
  std::string nb_out;
  nbud->add_option("--t2-hahn", nb_th, "Hahn-echo T2, s");
  nbud->add_option("--t2-cpmg", nb_tc, "dynamically decoupled T2, s");
  nbud->add_option("--g", nb_g, "effective g-factor");
  nbud->add_option("--out", nb_out, "report JSON path (default: stdout)");

  // tls-fit
  auto* tf = app.add_subcommand("tls-fit", "Fit TLS-limited Qi vs photon number");
  std::string tf_in, tf_out, tf_plot;
  tf->add_option("--input", tf_in, "CSV: n_photons,qi[,qi_err]")->required();
  tf->add_option("--out", tf_out, "report JSON path (default: stdout)");
  tf->add_option("--plot", tf_plot, "SVG plot path");

  // purcell
  auto* pc = app.add_subcommand("purcell",
                                "Cavity-QED chain: Purcell factor, mode volume, coupling");
  std::string pc_out, pc_plot;
  pc->add_option("--out", pc_out, "report JSON path (default: stdout)");
  pc->add_option("--plot", pc_plot, "SVG plot of T1 vs detuning");

  // holeburn
  auto* hb = app.add_subcommand("holeburn", "Fit spectral-hole linewidth models");
  std::string hb_mode = "power", hb_in, hb_out, hb_plot;
  double hb_t1 = 0, hb_temp = 0;
  hb->add_option("--mode", hb_mode, "power (rabi_rad_s,gamma_hz) or field (b_field_t,gamma_hz)");
  hb->add_option("--input", hb_in, "input CSV")->required();
  hb->add_option("--t1", hb_t1, "optical lifetime for power mode, s (default: config)");
  hb->add_option("--temp", hb_temp, "bath temperature for field mode, K (default: config)");
  hb->add_option("--out", hb_out, "report JSON path (default: stdout)");
  hb->add_option("--plot", hb_plot, "SVG plot path");

  // echo-process
  auto* ep = app.add_subcommand("echo-process", "Windowed-FFT echo area extraction");
  std::string ep_in, ep_out, ep_rep;
  bool ep_synth = false;
  double ep_win = 0, ep_bc = 0, ep_bw = 0, ep_bg = 0;
  ep->add_option("--input", ep_in, "trace CSV: time_s,i_volts,q_volts");
  ep->add_flag("--synth", ep_synth, "synthesize a trace from config [echo] and --seed");
  ep->add_option("--window", ep_win, "integration window, s");
  ep->add_option("--band-center", ep_bc, "band center, Hz");
  ep->add_option("--band-width", ep_bw, "band width, Hz");
  ep->add_option("--bg-width", ep_bg, "background bin width, Hz");
  ep->add_option("--out", ep_out, "processed CSV path (default: stdout)");
  ep->add_option("--report", ep_rep, "report JSON path");

  // reproduce
  auto* rp = app.add_subcommand("reproduce", "Recompute the reference results and check them");
  bool rp_all = false;
  std::string rp_out;
  rp->add_flag("--all", rp_all, "include the seeded statistical property suites");
  rp->add_option("--out", rp_out, "report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage problems are validation errors
  }

  if (*seed_opt) g.seed = seed_val;

  try {
    if (*am) return cmd_angle_map(g, am_freq, am_theta, am_site, am_no_tilt, am_out, am_plot);
    if (*sf) return cmd_s21_fit(g, sf_in, sf_nosym, sf_out, sf_plot);
    if (*ss) return cmd_spin_signature(g, ss_in, ss_b, ss_out, ss_rep, ss_plot);
    if (*df) return cmd_decay_fit(g, df_in, df_model, df_out, df_plot);
    if (*sm) return cmd_sd_map(g, sm_in, sm_t1, sm_out, sm_plot);
    if (*nbud) return cmd_noise_budget(g, nb_th, nb_tc, nb_g, nb_out);
    if (*tf) return cmd_tls_fit(g, tf_in, tf_out, tf_plot);
    if (*pc) return cmd_purcell(g, pc_out, pc_plot);
    if (*hb) return cmd_holeburn(g, hb_mode, hb_in, hb_t1, hb_temp, hb_out, hb_plot);
    if (*ep)
      return cmd_echo_process(g, ep_in, ep_synth, ep_win, ep_bc, ep_bw, ep_bg, ep_out, ep_rep);
    if (*rp) return cmd_reproduce(g, rp_all, rp_out);
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
