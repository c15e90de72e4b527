// Exercises the shared library through apnorm.h only.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "apnorm/apnorm.h"
#include "doctest.h"

namespace {

constexpr double kTwoPi = 6.283185307179586;

std::filesystem::path scratch(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "apnorm_capi_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

apn_table* norms_of(const char* text) {
  apn_config* cfg = nullptr;
  REQUIRE(apn_config_parse(text, &cfg) == APN_OK);
  apn_table* t = nullptr;
  REQUIRE(apn_run_norms(cfg, &t) == APN_OK);
  apn_config_free(cfg);
  return t;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::strlen(apn_version()) > 0);
  CHECK(std::string(apn_status_name(APN_OK)) == "ok");
  CHECK(std::string(apn_status_name(APN_ERR_CONFIG)) == "config error");
  CHECK(std::string(apn_status_name(static_cast<apn_status>(99))) == "unknown status");
}

TEST_CASE("null arguments are reported, not dereferenced") {
  double x = 0;
  CHECK(apn_modulus_omega(nullptr, 1.0, &x) == APN_ERR_NULL_ARG);
  CHECK(std::string(apn_last_error()).find("NULL") != std::string::npos);
  CHECK(apn_modulus_power(0.5, nullptr) == APN_ERR_NULL_ARG);
  CHECK(apn_phase_pl(nullptr, nullptr, 0, nullptr) == APN_ERR_NULL_ARG);
  CHECK(apn_config_parse(nullptr, nullptr) == APN_ERR_NULL_ARG);
  CHECK(apn_table_rows(nullptr) == 0);
  CHECK(apn_suite_warning(nullptr, 0) == nullptr);
  CHECK(std::string(apn_config_output_csv(nullptr)).empty());
  apn_modulus_free(nullptr);
  apn_phase_free(nullptr);
  apn_spectrum_free(nullptr);
  apn_config_free(nullptr);
  apn_table_free(nullptr);
  apn_suite_free(nullptr);
  apn_string_free(nullptr);
}

TEST_CASE("modulus round trip") {
  apn_modulus* m = nullptr;
  REQUIRE(apn_modulus_power(0.5, &m) == APN_OK);
  double w = 0, d = 0, c = 0;
  CHECK(apn_modulus_omega(m, kTwoPi, &w) == APN_OK);
  CHECK(w == doctest::Approx(1.0));
  CHECK(apn_modulus_chi(m, 0.3, &c) == APN_OK);
  CHECK(apn_modulus_chi_inv(m, c, &d) == APN_OK);
  CHECK(d == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(apn_modulus_omega(m, -1.0, &w) == APN_ERR_DOMAIN);
  apn_modulus_free(m);

  apn_modulus* bad = reinterpret_cast<apn_modulus*>(0x1);
  CHECK(apn_modulus_power(1.5, &bad) == APN_ERR_DOMAIN);
  CHECK(bad == nullptr);
}

TEST_CASE("error messages are per thread") {
  double x = 0;
  REQUIRE(apn_modulus_omega(nullptr, 1.0, &x) == APN_ERR_NULL_ARG);
  const std::string mine = apn_last_error();
  std::string theirs;
  std::thread([&] {
    apn_modulus* m = nullptr;
    apn_modulus_power(7.0, &m);
    theirs = apn_last_error();
  }).join();
  CHECK(theirs != mine);
  CHECK(std::string(apn_last_error()) == mine);
}

TEST_CASE("linear phase spectrum is a single spike") {
  apn_phase* f = nullptr;
  REQUIRE(apn_phase_linear(3, 0.0, &f) == APN_OK);
  apn_phase_info info;
  REQUIRE(apn_phase_info_get(f, &info) == APN_OK);
  CHECK(info.winding == 3);
  CHECK(info.affine == 1);
  CHECK(info.lip_constant < 0.0);

  apn_spectrum* s = nullptr;
  REQUIRE(apn_spectrum_compute(f, 5.0, 0, APN_ENGINE_AUTO, &s) == APN_OK);
  apn_spectrum_info si;
  REQUIRE(apn_spectrum_info_get(s, &si) == APN_OK);
  CHECK(si.center == 15);
  CHECK(si.engine == APN_ENGINE_EXACT);
  CHECK(si.band_error_rigorous == 1);
  double re = 0, im = 0;
  REQUIRE(apn_spectrum_coeff(s, 15, &re, &im) == APN_OK);
  CHECK(re == doctest::Approx(1.0));
  CHECK(im == doctest::Approx(0.0));
  CHECK(apn_spectrum_coeff(s, si.center + si.K + 1, &re, &im) == APN_ERR_RANGE);
  for (double p : {1.0, 1.5, 2.0}) {
    apn_norm n;
    REQUIRE(apn_ap_norm(s, p, &n) == APN_OK);
    CHECK(n.lo == 1.0);
    CHECK(n.hi == 1.0);
  }
  apn_norm n;
  CHECK(apn_ap_norm(s, 2.5, &n) == APN_ERR_DOMAIN);
  apn_spectrum_free(s);
  apn_phase_free(f);
}

TEST_CASE("engine dispatch") {
  apn_phase* f = nullptr;
  REQUIRE(apn_phase_cos(&f) == APN_OK);
  apn_spectrum* s = nullptr;
  CHECK(apn_spectrum_compute(f, 16.0, 0, APN_ENGINE_EXACT, &s) == APN_ERR_DISPATCH);
  CHECK(s == nullptr);
  REQUIRE(apn_spectrum_compute(f, 16.0, 0, APN_ENGINE_AUTO, &s) == APN_OK);
  apn_spectrum_info si;
  REQUIRE(apn_spectrum_info_get(s, &si) == APN_OK);
  CHECK(si.engine == APN_ENGINE_DFT);
  CHECK(si.band_error_rigorous == 0);
  apn_norm n;
  REQUIRE(apn_ap_norm(s, 2.0, &n) == APN_OK);
  CHECK(n.lo <= 1.0);
  CHECK(n.hi >= 1.0);
  CHECK(apn_spectrum_compute(f, 16.0, -1, APN_ENGINE_AUTO, &s) == APN_ERR_DOMAIN);
  apn_spectrum_free(s);
  apn_phase_free(f);
}

TEST_CASE("phases built through the C API") {
  apn_modulus* m = nullptr;
  REQUIRE(apn_modulus_power(0.5, &m) == APN_OK);
  apn_phase* c = nullptr;
  REQUIRE(apn_phase_cantor(m, 6, &c) == APN_OK);
  apn_phase_info info;
  REQUIRE(apn_phase_info_get(c, &info) == APN_OK);
  CHECK(info.winding == 0);
  CHECK(info.lip_constant > 0.0);
  double v0 = 1, v1 = 0;
  CHECK(apn_phase_value(c, 0.0, &v0) == APN_OK);
  CHECK(apn_phase_value(c, kTwoPi, &v1) == APN_OK);
  CHECK(v0 == 0.0);
  CHECK(v1 == doctest::Approx(0.0));
  double dev = 0;
  CHECK(apn_chord_deviation(c, 0.0, 1.0, &dev) == APN_OK);
  CHECK(dev > 0.0);

  apn_phase* mod = nullptr;
  REQUIRE(apn_phase_modulate(c, 2, &mod) == APN_OK);
  REQUIRE(apn_phase_info_get(mod, &info) == APN_OK);
  CHECK(info.winding == 2);

  apn_phase* nested = nullptr;
  CHECK(apn_phase_nested(m, 4, 6, &nested) == APN_OK);
  apn_phase* bad = nullptr;
  CHECK(apn_phase_cantor(m, 0, &bad) != APN_OK);
  const double bp[] = {0.0, 2.0, 1.0};
  const double vals[] = {0.0, 1.0, 0.0};
  CHECK(apn_phase_pl(bp, vals, 3, &bad) != APN_OK);
  CHECK(bad == nullptr);

  apn_phase_free(nested);
  apn_phase_free(mod);
  apn_phase_free(c);
  apn_modulus_free(m);
}

TEST_CASE("witness and envelopes") {
  apn_modulus* m = nullptr;
  REQUIRE(apn_modulus_power(1.0, &m) == APN_OK);
  apn_phase* f = nullptr;
  REQUIRE(apn_phase_cos(&f) == APN_OK);
  double c = 0;
  REQUIRE(apn_lip_estimate(f, m, &c) == APN_OK);
  CHECK(c > 0.0);
  apn_witness_report w;
  REQUIRE(apn_witness(f, m, c, 256.0, 100, &w) == APN_OK);
  CHECK(w.pass == 1);
  CHECK(w.measured >= w.threshold);
  CHECK(w.window_lo <= w.t);
  CHECK(w.t <= w.window_hi);
  CHECK(apn_witness(f, m, c, 256.0, 10000, &w) == APN_ERR_PRECONDITION);

  double e = 0;
  CHECK(apn_envelope_value(APN_ENV_C2, nullptr, 1.0, 64.0, &e) == APN_OK);
  CHECK(e > 0.0);
  CHECK(apn_envelope_value(APN_ENV_LOWER, nullptr, 1.0, 64.0, &e) == APN_ERR_NULL_ARG);
  apn_envelope k;
  CHECK(apn_envelope_parse("thetaAp", &k) == APN_OK);
  CHECK(k == APN_ENV_THETA_AP);
  CHECK(apn_envelope_parse("nope", &k) == APN_ERR_DOMAIN);
  apn_phase_free(f);
  apn_modulus_free(m);
}

TEST_CASE("config errors carry the line") {
  apn_config* cfg = nullptr;
  CHECK(apn_config_parse("phase.kind = cos\n\nlambda.count = x\n", &cfg) == APN_ERR_CONFIG);
  CHECK(apn_last_error_line() == 3);
  CHECK(cfg == nullptr);
  CHECK(apn_config_load("/nonexistent/apnorm.cfg", &cfg) == APN_ERR_IO);
  CHECK(apn_last_error_line() == 0);

  REQUIRE(apn_config_parse("phase.kind = cos\noutput.csv = out.csv\nmodulus.alpha = 0.25\n", &cfg) == APN_OK);
  CHECK(std::string(apn_config_output_csv(cfg)) == "out.csv");
  apn_modulus* m = nullptr;
  REQUIRE(apn_config_modulus(cfg, &m) == APN_OK);
  double w = 0;
  apn_modulus_omega(m, kTwoPi / 16, &w);
  CHECK(w == doctest::Approx(0.5));
  apn_modulus_free(m);
  apn_config_free(cfg);
}

TEST_CASE("tables, CSV round trip and fits") {
  apn_table* t = norms_of("phase.kind = cantor\nlambda.min = 16\nlambda.max = 1024\nlambda.count = 7\np = 1, 1.2\n");
  REQUIRE(apn_table_rows(t) == 14);
  apn_norm_row r;
  REQUIRE(apn_table_row(t, 0, &r) == APN_OK);
  CHECK(r.lambda == 16.0);
  CHECK(r.lo <= r.hi);
  CHECK(r.engine == APN_ENGINE_EXACT);
  CHECK(apn_table_row(t, 14, &r) == APN_ERR_RANGE);

  char* csv = nullptr;
  REQUIRE(apn_table_csv(t, &csv) == APN_OK);
  const auto path = scratch("rows.csv");
  {
    std::ofstream out(path, std::ios::binary);
    out << csv;
  }
  apn_table* back = nullptr;
  REQUIRE(apn_table_read_csv(path.string().c_str(), &back) == APN_OK);
  char* csv2 = nullptr;
  REQUIRE(apn_table_csv(back, &csv2) == APN_OK);
  CHECK(std::string(csv) == std::string(csv2));
  apn_string_free(csv);
  apn_string_free(csv2);

  apn_fit fit;
  REQUIRE(apn_fit_exponent(t, 1.0, nullptr, &fit) == APN_OK);
  CHECK(fit.points >= 4);
  CHECK(fit.exponent > 0.2);
  CHECK(fit.exponent < 0.45);
  const apn_window tiny{16.0, 32.0};
  CHECK(apn_fit_exponent(t, 1.0, &tiny, &fit) == APN_ERR_DOMAIN);

  apn_modulus* m = nullptr;
  REQUIRE(apn_modulus_power(0.5, &m) == APN_OK);
  apn_envelope_summary sum;
  REQUIRE(apn_compare_envelopes(t, 1.0, APN_ENV_LOWER, m, nullptr, &sum, nullptr, 0) == APN_OK);
  CHECK(sum.rows == 7);
  std::vector<apn_envelope_row> rows(3);
  REQUIRE(apn_compare_envelopes(t, 1.0, APN_ENV_LOWER, m, nullptr, &sum, rows.data(), rows.size()) == APN_OK);
  CHECK(rows[0].lambda == 16.0);
  CHECK(rows[0].ratio_mid >= sum.min_ratio);
  CHECK(sum.min_ratio <= sum.constant);
  CHECK(sum.constant <= sum.max_ratio);
  CHECK(apn_compare_envelopes(t, 1.0, APN_ENV_LOWER, m, nullptr, &sum, nullptr, 2) == APN_ERR_NULL_ARG);

  apn_modulus_free(m);
  apn_table_free(back);
  apn_table_free(t);
  std::filesystem::remove(path);
}

TEST_CASE("witness suite") {
  apn_config* cfg = nullptr;
  REQUIRE(apn_config_parse("phase.kind = cos\nmodulus.alpha = 1\nlambda.min = 64\nlambda.max = 256\n"
                           "lambda.count = 3\np = 1, 1.2\nwitness.count = 8\n",
                           &cfg) == APN_OK);
  apn_suite* s = nullptr;
  REQUIRE(apn_witness_suite(cfg, &s) == APN_OK);
  apn_suite_summary sum;
  REQUIRE(apn_suite_summary_get(s, &sum) == APN_OK);
  CHECK(sum.failed == 0);
  CHECK(sum.passed == 24);
  CHECK(sum.reports == 24);
  CHECK(sum.final_checks == 6);
  CHECK(sum.final_failed == 0);
  apn_witness_report w;
  REQUIRE(apn_suite_report(s, 0, &w) == APN_OK);
  CHECK(w.pass == 1);
  CHECK(apn_suite_report(s, 24, &w) == APN_ERR_RANGE);
  apn_final_check fc;
  REQUIRE(apn_suite_final(s, 5, &fc) == APN_OK);
  CHECK(fc.holds == 1);
  char* csv = nullptr;
  REQUIRE(apn_suite_csv(s, &csv) == APN_OK);
  CHECK(std::string(csv).rfind("lambda,k,t,measured,threshold,pass\n", 0) == 0);
  apn_string_free(csv);
  apn_suite_free(s);
  apn_config_free(cfg);
}

TEST_CASE("plot writes nothing on failure") {
  const auto path = scratch("empty.svg");
  std::filesystem::remove(path);
  const auto csv = scratch("empty.csv");
  {
    std::ofstream out(csv);
    out << "lambda,p,norm_lo,norm_hi,band_K,tail,engine\n";
  }
  apn_table* t = nullptr;
  REQUIRE(apn_table_read_csv(csv.string().c_str(), &t) == APN_OK);
  CHECK(apn_table_rows(t) == 0);
  CHECK(apn_plot(t, nullptr, 0, nullptr, path.string().c_str()) == APN_ERR_IO);
  CHECK_FALSE(std::filesystem::exists(path));
  apn_table_free(t);

  t = norms_of("phase.kind = cos\nlambda.min = 16\nlambda.max = 128\nlambda.count = 4\np = 1\n");
  const apn_envelope ov[] = {APN_ENV_C2, APN_ENV_LOG};
  REQUIRE(apn_plot(t, ov, 2, nullptr, path.string().c_str()) == APN_OK);
  CHECK(std::filesystem::file_size(path) > 0);
  const apn_envelope need_m[] = {APN_ENV_LOWER};
  CHECK(apn_plot(t, need_m, 1, nullptr, path.string().c_str()) == APN_ERR_NULL_ARG);
  apn_table_free(t);
  std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("shipped configs load") {
  int seen = 0;
  for (const auto& e : std::filesystem::directory_iterator(APNORM_CONFIG_DIR)) {
    if (e.path().extension() != ".cfg") continue;
    CAPTURE(e.path().string());
    apn_config* cfg = nullptr;
    CHECK(apn_config_load(e.path().string().c_str(), &cfg) == APN_OK);
    apn_config_free(cfg);
    ++seen;
  }
  CHECK(seen >= 4);
}
