#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "spectro/coherence.hpp"
#include "spectro/constants.hpp"
#include "spectro/echo.hpp"
#include "spectro/optical.hpp"
#include "spectro/resonator.hpp"
#include "spectro/rng.hpp"

#include "oracles.hpp"

using nlohmann::json;
using namespace spectro;

namespace {

struct CliResult {
  int exit_code;
  std::string out;  // stdout and stderr merged
};

CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("SPECTRO_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "SPECTRO_BIN must point at the spectro binary");
  const std::string cmd = std::string(bin) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& body)
      : path("tmp_cli_" + name) {
    std::ofstream f(path, std::ios::binary);
    f << body;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TEST_CASE("cli: help and usage errors") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("").exit_code == 2);              // a subcommand is required
  CHECK(run_cli("angle-map --nope").exit_code == 2);
  CHECK(run_cli("decay-fit").exit_code == 2);     // missing required --input
  CHECK(run_cli("angle-map --theta bogus").exit_code == 2);
}

TEST_CASE("cli: angle map emits the documented CSV with frozen values") {
  const CliResult r = run_cli("angle-map --freq 5.81e9 --theta 10:40:30 --site c3i");
  REQUIRE(r.exit_code == 0);
  const auto lines = split_lines(r.out);
  REQUIRE(lines.size() == 1 + 2 * 4);  // two angles, four sub-sites
  CHECK(lines[0] == "theta_deg,sub_site_id,b_res_mT");

  double b_min = 1e9;
  int n10 = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string theta, id, b;
    std::getline(row, theta, ',');
    std::getline(row, id, ',');
    std::getline(row, b, ',');
    CHECK(id.rfind("c3i_", 0) == 0);
    if (theta == "10") {
      ++n10;
      b_min = std::min(b_min, std::stod(b));
    }
  }
  CHECK(n10 == 4);
  // strongest effective g at 10 deg is a frozen reference value
  const double expect_mT =
      1e3 * constants::h * 5.81e9 / (11.502489 * constants::mu_B);
  CHECK_REL(b_min, expect_mT, 1e-5);
}

TEST_CASE("cli: noise budget reproduces the headline field-noise number") {
  const CliResult r =
      run_cli("noise-budget --t2-hahn 0.38e-3 --t2-cpmg 1.14e-3 --g 3.2");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  const double nT = j["results"]["delta_b"]["value"].get<double>();
  CHECK_REL(nT, 12.46848707, 1e-6);
  CHECK(std::abs(nT - 12.5) < 0.05);  // rounds to the quoted 12.5 nT
  CHECK(j["results"]["delta_b"]["unit"] == "nT");
  CHECK(j["config"]["source"] == "defaults");
}

TEST_CASE("cli: config file overrides feed the computation") {
  const TempFile cfg("g2.ini", "[ensemble]\ng_eff = 2.0\n");
  const CliResult r = run_cli("noise-budget --t2-hahn 0.38e-3 --t2-cpmg 1.14e-3 --config " +
                              cfg.path);
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK_REL(j["results"]["delta_b"]["value"].get<double>(),
            12.46848707 * 3.2 / 2.0, 1e-6);
  CHECK(j["config"]["source"] == cfg.path);

  CHECK(run_cli("noise-budget --config does_not_exist.ini").exit_code == 2);
  const TempFile bad("badkey.ini", "[ensemble]\nnot_a_key = 1\n");
  const CliResult rb = run_cli("noise-budget --config " + bad.path);
  CHECK(rb.exit_code == 2);
  CHECK(rb.out.find("not_a_key") != std::string::npos);
}

TEST_CASE("cli: decay fit recovers the stretched-exponential parameters") {
  std::ostringstream csv;
  csv << "delay_s,amplitude\n";
  const StretchedDecay truth{1.0, 0.38e-3, 2.11};
  for (int i = 0; i < 40; ++i) {
    const double t = 5e-6 + (6e-4 - 5e-6) * i / 39.0;
    csv << fmt(t) << "," << fmt(hahn_decay(t, truth) + 0.002 * rng::gauss(11, i))
        << "\n";
  }
  const TempFile f("decay.csv", csv.str());
  const CliResult r = run_cli("decay-fit --input " + f.path);
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["fit"]["converged"] == true);
  CHECK_REL(j["fit"]["parameters"]["t2_s"]["value"].get<double>(), 0.38e-3, 0.05);
  CHECK_REL(j["derived"]["t2"]["value"].get<double>(),
            j["fit"]["parameters"]["t2_s"]["value"].get<double>(), 1e-12);
  CHECK(j["fit"]["input_digest"] != "none");
}

TEST_CASE("cli: malformed decay input fails with a located error") {
  const TempFile f("bad_decay.csv", "delay_s,amplitude\n1e-5,0.9\n2e-5,oops\n");
  const CliResult r = run_cli("decay-fit --input " + f.path);
  CHECK(r.exit_code == 2);
  CHECK(r.out.find(f.path + ":3") != std::string::npos);
}

TEST_CASE("cli: transmission fit recovers resonator parameters from both schemas") {
  ResonatorModel truth;
  truth.omega0_hz = 5.81e9;
  truth.Qi = 370043.0;
  truth.Qe = 3001.0;
  truth.Qalpha = 7000.0;
  std::ostringstream cart, polar;
  cart << "frequency_hz,s21_real,s21_imag\n";
  polar << "frequency_hz,s21_mag_db,s21_phase_rad\n";
  for (int i = 0; i <= 200; ++i) {
    const double fhz = 5.81e9 - 6e6 + 12e6 * i / 200.0;
    const auto v = s21(fhz, truth);
    cart << fmt(fhz) << "," << fmt(v.real()) << "," << fmt(v.imag()) << "\n";
    polar << fmt(fhz) << "," << fmt(20.0 * std::log10(std::abs(v))) << ","
          << fmt(std::arg(v)) << "\n";
  }
  for (const auto& variant :
       {TempFile("s21c.csv", cart.str()), TempFile("s21p.csv", polar.str())}) {
    const CliResult r = run_cli("s21-fit --input " + variant.path);
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["fit"]["converged"] == true);
    CHECK_REL(j["fit"]["parameters"]["f0_hz"]["value"].get<double>(), 5.81e9, 1e-6);
    CHECK_REL(j["fit"]["parameters"]["qi"]["value"].get<double>(), 370043.0, 0.05);
    CHECK_REL(j["fit"]["parameters"]["qe"]["value"].get<double>(), 3001.0, 0.05);
  }
}

TEST_CASE("cli: echo processing is deterministic and reads trace files") {
  const CliResult a = run_cli("echo-process --synth --seed 7");
  const CliResult b = run_cli("echo-process --synth --seed 7");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  const auto lines = split_lines(a.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "trace_id,echo_area,pedestal_area");
  CHECK(lines[1].rfind("synth-seed-7,", 0) == 0);

  // the same trace routed through a CSV file gives the same area
  const QuadratureTrace tr = synth_echo(200e6, 1.0, 0.2e-6, 0.05, 3e-6, 1e9, 7);
  std::ostringstream csv;
  csv << "time_s,i_volts,q_volts\n";
  for (std::size_t k = 0; k < tr.i_samples.size(); ++k)
    csv << fmt(k / 1e9) << "," << fmt(tr.i_samples[k]) << "," << fmt(tr.q_samples[k])
        << "\n";
  const TempFile f("trace.csv", csv.str());
  const CliResult r = run_cli("echo-process --input " + f.path);
  REQUIRE(r.exit_code == 0);
  std::istringstream row(split_lines(r.out)[1]);
  std::string id, area_file;
  std::getline(row, id, ',');
  std::getline(row, area_file, ',');
  std::istringstream synth_row(split_lines(a.out)[1]);
  std::string id2, area_synth;
  std::getline(synth_row, id2, ',');
  std::getline(synth_row, area_synth, ',');
  CHECK_REL(std::stod(area_file), std::stod(area_synth), 1e-6);
}

TEST_CASE("cli: saturable-loss fit recovers the quality-factor model") {
  ResonatorModel rm;
  rm.Qi = 1.0;
  rm.Qe = 1.0;
  rm.tls = TlsParams{13422.0, 3.92e-5, 3.8e6, 0.36};
  std::ostringstream csv;
  csv << "n_photons,qi\n";
  for (int i = 0; i < 30; ++i) {
    const double n = std::pow(10.0, 9.0 * i / 29.0);
    csv << fmt(n) << "," << fmt(tls_quality(n, rm) * (1.0 + 0.002 * rng::gauss(4, i)))
        << "\n";
  }
  const TempFile f("tls.csv", csv.str());
  const CliResult r = run_cli("tls-fit --input " + f.path);
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["fit"]["converged"] == true);
  CHECK_REL(j["fit"]["parameters"]["qi0"]["value"].get<double>(), 13422.0, 0.05);
}

TEST_CASE("cli: hole-linewidth fits in both operating modes") {
  // power mode: linewidth vs Rabi drive
  std::ostringstream pw;
  pw << "rabi_rad_s,gamma_hz\n";
  for (int i = 0; i < 25; ++i) {
    const double om = 2.0 * M_PI * 80e3 * i / 24.0;
    pw << fmt(om) << "," << fmt(bloch_linewidth(om, 3e-3, 122e-6)) << "\n";
  }
  const TempFile fp("hole_pw.csv", pw.str());
  const CliResult rp = run_cli("holeburn --mode power --input " + fp.path);
  REQUIRE(rp.exit_code == 0);
  const json jp = json::parse(rp.out);
  CHECK_REL(jp["fit"]["parameters"]["t2_star_s"]["value"].get<double>(), 122e-6, 0.02);

  // field mode: hole width vs magnetic field
  OpticalLinewidthModel om;
  om.Gamma0_opt_hz = 158.6e3;
  om.Gamma_SD_opt_hz = 635.5e3;
  om.g_env = 2.02;
  om.T_bath_K = 0.22;
  std::ostringstream fld;
  fld << "b_field_t,gamma_hz\n";
  for (int i = 0; i < 25; ++i) {
    const double B = 1.2 * i / 24.0;
    fld << fmt(B) << "," << fmt(holeburn_B_model(B, om) + 2e3 * rng::gauss(6, i))
        << "\n";
  }
  const TempFile ff("hole_fld.csv", fld.str());
  const CliResult rf = run_cli("holeburn --mode field --input " + ff.path);
  REQUIRE(rf.exit_code == 0);
  const json jf = json::parse(rf.out);
  CHECK_REL(jf["fit"]["parameters"]["gamma0_hz"]["value"].get<double>(), 158.6e3, 0.10);
  CHECK_REL(jf["derived"]["zero_field_linewidth"]["value"].get<double>(), 794.1e3, 0.05);
}

TEST_CASE("cli: stimulated-echo surface fit extracts diffusion parameters") {
  const SpectralDiffusionModel truth{700.0, 4400.0, 287.0, 0.8};
  std::ostringstream csv;
  csv << "tau_s,tw_s,amplitude\n";
  for (double tau : {10e-6, 30e-6, 50e-6, 80e-6})
    for (int i = 0; i < 10; ++i) {
      const double tw = std::pow(10.0, -4.0 + 4.3 * i / 9.0);
      csv << fmt(tau) << "," << fmt(tw) << ","
          << fmt(stimulated_echo(tau, tw, truth)) << "\n";
    }
  const TempFile f("sd.csv", csv.str());
  const CliResult r = run_cli("sd-map --input " + f.path + " --t1 0.8");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["fit"]["converged"] == true);
  CHECK_REL(j["fit"]["parameters"]["gamma_sd_hz"]["value"].get<double>(), 4400.0, 0.10);
  CHECK_REL(j["derived"]["sd_limited_t2"]["value"].get<double>(), 1.004124983e-3, 0.10);
}

TEST_CASE("cli: cavity chain report carries the frozen reference numbers") {
  const CliResult r = run_cli("purcell");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK_REL(j["results"]["purcell_factor"]["value"].get<double>(), 271.4285714, 1e-6);
  CHECK_REL(j["results"]["mode_volume"]["value"].get<double>(), 9.37866633, 1e-6);
  CHECK_REL(j["results"]["t1_on_resonance"]["value"].get<double>(), 1.40509139e-4,
            1e-6);
}

TEST_CASE("cli: model-mode spin signature reports the peak broadening") {
  const TempFile out("sig.csv", "");
  const CliResult r = run_cli("spin-signature --b-range 0.125:0.135:0.0005 --out " +
                              out.path);
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK_REL(j["derived"]["peak_delta_kappa"]["value"].get<double>(), 277202.9412,
            1e-6);
  std::ifstream csv(out.path);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "b_field_t,delta_kappa_hz,delta_f_hz");
}

TEST_CASE("cli: reproduce passes with only documented divergences") {
  const TempFile rep("repro.json", "");
  const CliResult r = run_cli("reproduce --out " + rep.path);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("[PASS]") != std::string::npos);
  CHECK(r.out.find("documented divergence") != std::string::npos);
  std::ifstream in(rep.path);
  const json j = json::parse(in);
  CHECK(j["acceptance"]["summary"]["all_pass"] == true);
  CHECK(j["acceptance"]["summary"]["documented_failures"].get<int>() >= 1);
}

TEST_CASE("cli: plots are written as SVG files") {
  const TempFile svg("plot.svg", "");
  const TempFile csvout("am.csv", "");
  const CliResult r = run_cli("angle-map --theta 0:360:5 --out " + csvout.path +
                              " --plot " + svg.path);
  REQUIRE(r.exit_code == 0);
  std::ifstream in(svg.path);
  std::stringstream body;
  body << in.rdbuf();
  CHECK(body.str().find("<svg") != std::string::npos);
  CHECK(body.str().find("polyline") != std::string::npos);
}
