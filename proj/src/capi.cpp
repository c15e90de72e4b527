#include "apnorm/apnorm.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "apnorm/error.hpp"
#include "apnorm/lab.hpp"

struct apn_modulus {
  apnorm::Modulus m;
};
struct apn_phase {
  apnorm::PhaseFn f;
};
struct apn_spectrum {
  apnorm::Spectrum s;
};
struct apn_config {
  apnorm::ExperimentConfig c;
};
struct apn_table {
  std::vector<apnorm::NormRow> rows;
};
struct apn_suite {
  apnorm::WitnessSuite s;
};

namespace {

thread_local std::string t_error;
thread_local int t_error_line = 0;

struct NullArg : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

apn_status fail(apn_status s, const char* msg, int line = 0) {
  t_error = msg;
  t_error_line = line;
  return s;
}

template <class F>
apn_status guard(F&& body) {
  try {
    body();
    return APN_OK;
  } catch (const apnorm::ConfigError& e) {
    return fail(APN_ERR_CONFIG, e.what(), e.line());
  } catch (const apnorm::DomainError& e) {
    return fail(APN_ERR_DOMAIN, e.what());
  } catch (const apnorm::PreconditionError& e) {
    return fail(APN_ERR_PRECONDITION, e.what());
  } catch (const apnorm::ConstructionError& e) {
    return fail(APN_ERR_CONSTRUCTION, e.what());
  } catch (const apnorm::DispatchError& e) {
    return fail(APN_ERR_DISPATCH, e.what());
  } catch (const apnorm::NumericError& e) {
    return fail(APN_ERR_NUMERIC, e.what());
  } catch (const apnorm::IoError& e) {
    return fail(APN_ERR_IO, e.what());
  } catch (const NullArg& e) {
    return fail(APN_ERR_NULL_ARG, e.what());
  } catch (const OutOfRange& e) {
    return fail(APN_ERR_RANGE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(APN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(APN_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(APN_ERR_INTERNAL, "unknown internal error");
  }
}

template <class T>
T& need(T* p, const char* what) {
  if (!p) throw NullArg(std::string(what) + " is NULL");
  return *p;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

apn_engine to_c(apnorm::Engine e) { return e == apnorm::Engine::Exact ? APN_ENGINE_EXACT : APN_ENGINE_DFT; }

apnorm::EnvelopeKind to_cpp(apn_envelope k) {
  switch (k) {
    case APN_ENV_LOWER: return apnorm::EnvelopeKind::Lower;
    case APN_ENV_THETA_A: return apnorm::EnvelopeKind::ThetaA;
    case APN_ENV_THETA_AP: return apnorm::EnvelopeKind::ThetaAp;
    case APN_ENV_C2: return apnorm::EnvelopeKind::C2;
    case APN_ENV_LOG: return apnorm::EnvelopeKind::Log;
  }
  throw apnorm::DomainError("unknown envelope kind");
}

bool needs_modulus(apn_envelope k) { return k == APN_ENV_LOWER || k == APN_ENV_THETA_A || k == APN_ENV_THETA_AP; }

apn_witness_report to_c(const apnorm::WitnessReport& w) {
  return {w.lambda, w.k, w.t, w.window.lo, w.window.hi, w.delta, w.measured, w.threshold, w.quad_error, w.pass ? 1 : 0};
}

std::optional<apnorm::FitWindow> to_cpp(const apn_window* w) {
  if (!w) return std::nullopt;
  return apnorm::FitWindow{w->lo, w->hi};
}

template <class T, class Make>
apn_status make_handle(T** out, Make make) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    *out = new T{make()};
  });
}

}  // namespace

extern "C" {

const char* apn_version(void) { return "1.0.0"; }

const char* apn_status_name(apn_status s) {
  switch (s) {
    case APN_OK: return "ok";
    case APN_ERR_DOMAIN: return "domain error";
    case APN_ERR_PRECONDITION: return "precondition failed";
    case APN_ERR_CONSTRUCTION: return "construction failed";
    case APN_ERR_DISPATCH: return "wrong engine";
    case APN_ERR_NUMERIC: return "numeric failure";
    case APN_ERR_IO: return "I/O error";
    case APN_ERR_CONFIG: return "config error";
    case APN_ERR_NULL_ARG: return "null argument";
    case APN_ERR_RANGE: return "index out of range";
    case APN_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* apn_last_error(void) { return t_error.c_str(); }
int apn_last_error_line(void) { return t_error_line; }
void apn_string_free(char* s) { std::free(s); }

apn_status apn_modulus_power(double alpha, apn_modulus** out) {
  return make_handle(out, [&] { return apnorm::Modulus::power(alpha); });
}
apn_status apn_modulus_power_log(double alpha, double beta, apn_modulus** out) {
  return make_handle(out, [&] { return apnorm::Modulus::power_log(alpha, beta); });
}
void apn_modulus_free(apn_modulus* m) { delete m; }

#define APN_SCALAR(name, expr)      \
  return guard([&] {                \
    need(out, "out");               \
    const auto& M = need(m, name).m; \
    *out = (expr);                  \
  })

apn_status apn_modulus_omega(const apn_modulus* m, double delta, double* out) { APN_SCALAR("modulus", M.omega(delta)); }
apn_status apn_modulus_chi(const apn_modulus* m, double delta, double* out) { APN_SCALAR("modulus", M.chi(delta)); }
apn_status apn_modulus_chi_inv(const apn_modulus* m, double u, double* out) { APN_SCALAR("modulus", M.chi_inv(u)); }
apn_status apn_modulus_rho(const apn_modulus* m, int j, double* out) { APN_SCALAR("modulus", M.rho(j)); }
apn_status apn_modulus_theta(const apn_modulus* m, double y, double* out) { APN_SCALAR("modulus", M.theta(y)); }
apn_status apn_modulus_theta_p(const apn_modulus* m, double p, double y, double* out) {
  APN_SCALAR("modulus", M.theta_p(p, y));
}

apn_status apn_phase_linear(int slope, double offset, apn_phase** out) {
  return make_handle(out, [&] { return apnorm::linear_phase(slope, offset); });
}
apn_status apn_phase_cos(apn_phase** out) {
  return make_handle(out, [&] { return apnorm::cos_phase(); });
}
apn_status apn_phase_pl(const double* breakpoints, const double* values, size_t n, apn_phase** out) {
  return make_handle(out, [&] {
    need(breakpoints, "breakpoints");
    need(values, "values");
    return apnorm::pl_phase({breakpoints, breakpoints + n}, {values, values + n});
  });
}
apn_status apn_phase_cantor(const apn_modulus* m, int depth, apn_phase** out) {
  return make_handle(out, [&] { return apnorm::cantor_primitive(need(m, "modulus").m, depth); });
}
apn_status apn_phase_nested(const apn_modulus* m, int levels, int depth, apn_phase** out) {
  return make_handle(out, [&] { return apnorm::nested_phase(need(m, "modulus").m, levels, depth).phase; });
}
apn_status apn_phase_modulate(const apn_phase* f, int m, apn_phase** out) {
  return make_handle(out, [&] { return apnorm::modulate(need(f, "phase").f, m); });
}
apn_status apn_phase_diffeo(const apn_phase* f, double eps, apn_phase** out) {
  return make_handle(out, [&] { return apnorm::diffeo(need(f, "phase").f, eps); });
}
void apn_phase_free(apn_phase* f) { delete f; }

apn_status apn_phase_info_get(const apn_phase* f, apn_phase_info* out) {
  return guard([&] {
    const auto& p = need(f, "phase").f;
    auto& o = need(out, "out");
    o.winding = p.winding();
    o.affine = p.is_affine() ? 1 : 0;
    o.pieces = p.piece_count();
    o.sup_deriv = p.sup_deriv();
    o.monotone_pieces = p.monotone_pieces();
    o.perturbation = p.perturbation();
    o.lip_constant = p.lip_cert() ? p.lip_cert()->constant : -1.0;
  });
}
apn_status apn_phase_value(const apn_phase* f, double t, double* out) {
  return guard([&] { need(out, "out") = need(f, "phase").f.value(t); });
}
apn_status apn_phase_derivative(const apn_phase* f, double t, double* out) {
  return guard([&] { need(out, "out") = need(f, "phase").f.derivative(t); });
}
apn_status apn_chord_deviation(const apn_phase* f, double lo, double hi, double* out) {
  return guard([&] { need(out, "out") = apnorm::chord_deviation(need(f, "phase").f, {lo, hi}); });
}

apn_status apn_spectrum_compute(const apn_phase* f, double lambda, long K, apn_engine engine, apn_spectrum** out) {
  return make_handle(out, [&] {
    const auto& p = need(f, "phase").f;
    if (K < 0) throw apnorm::DomainError("K must be >= 0");
    const long band = K == 0 ? apnorm::band_for(lambda) : K;
    apnorm::Engine e = p.is_affine() ? apnorm::Engine::Exact : apnorm::Engine::Dft;
    if (engine == APN_ENGINE_EXACT) e = apnorm::Engine::Exact;
    if (engine == APN_ENGINE_DFT) e = apnorm::Engine::Dft;
    return apnorm::compute_spectrum(p, lambda, band, e);
  });
}
void apn_spectrum_free(apn_spectrum* s) { delete s; }

apn_status apn_spectrum_info_get(const apn_spectrum* s, apn_spectrum_info* out) {
  return guard([&] {
    const auto& sp = need(s, "spectrum").s;
    need(out, "out") = {sp.lambda,           sp.K,
                        sp.center,           to_c(sp.engine),
                        sp.band_error,       sp.band_error_rigorous ? 1 : 0,
                        sp.perturbation_error, sp.tail_pointwise,
                        sp.tail_l2};
  });
}
apn_status apn_spectrum_coeff(const apn_spectrum* s, long k, double* re, double* im) {
  return guard([&] {
    const auto& sp = need(s, "spectrum").s;
    need(re, "re");
    need(im, "im");
    if (k < sp.k_min() || k > sp.k_max()) throw OutOfRange("k outside the computed band");
    const auto c = sp.coefficient(k);
    *re = c.real();
    *im = c.imag();
  });
}
apn_status apn_ap_norm(const apn_spectrum* s, double p, apn_norm* out) {
  return guard([&] {
    const auto n = apnorm::ap_norm(need(s, "spectrum").s, p);
    need(out, "out") = {n.p, n.lo, n.hi, n.K, n.tail, n.ideal_lo, n.ideal_hi};
  });
}
apn_status apn_triangle_coeff(double eps, long k, double* out) {
  return guard([&] { need(out, "out") = apnorm::triangle_coeffs(eps, k); });
}

apn_status apn_lip_estimate(const apn_phase* f, const apn_modulus* m, double* out) {
  return guard([&] { need(out, "out") = apnorm::lip_estimate(need(f, "phase").f, need(m, "modulus").m); });
}
apn_status apn_delta_lambda(const apn_modulus* m, double c, double lambda, double* out) {
  return guard([&] { need(out, "out") = apnorm::delta_lambda(need(m, "modulus").m, c, lambda); });
}
apn_status apn_witness(const apn_phase* f, const apn_modulus* m, double c, double lambda, long k,
                       apn_witness_report* out) {
  return guard([&] {
    need(out, "out") = to_c(apnorm::witness(need(f, "phase").f, need(m, "modulus").m, c, lambda, k));
  });
}
apn_status apn_envelope_value(apn_envelope kind, const apn_modulus* m, double p, double lambda, double* out) {
  return guard([&] {
    need(out, "out");
    const auto mod = needs_modulus(kind) ? need(m, "modulus").m : apnorm::Modulus::power(1.0);
    *out = apnorm::envelope_value(to_cpp(kind), mod, p, lambda);
  });
}
apn_status apn_envelope_parse(const char* name, apn_envelope* out) {
  return guard([&] {
    need(out, "out");
    switch (apnorm::parse_envelope_kind(&need(name, "name"))) {
      case apnorm::EnvelopeKind::Lower: *out = APN_ENV_LOWER; break;
      case apnorm::EnvelopeKind::ThetaA: *out = APN_ENV_THETA_A; break;
      case apnorm::EnvelopeKind::ThetaAp: *out = APN_ENV_THETA_AP; break;
      case apnorm::EnvelopeKind::C2: *out = APN_ENV_C2; break;
      case apnorm::EnvelopeKind::Log: *out = APN_ENV_LOG; break;
    }
  });
}

apn_status apn_config_load(const char* path, apn_config** out) {
  return make_handle(out, [&] { return apnorm::load_config(&need(path, "path")); });
}
apn_status apn_config_parse(const char* text, apn_config** out) {
  return make_handle(out, [&] { return apnorm::parse_config(&need(text, "text")); });
}
void apn_config_free(apn_config* c) { delete c; }
const char* apn_config_output_csv(const apn_config* c) { return c ? c->c.output_csv.c_str() : ""; }
apn_status apn_config_modulus(const apn_config* c, apn_modulus** out) {
  return make_handle(out, [&] { return need(c, "config").c.modulus(); });
}

apn_status apn_run_norms(const apn_config* c, apn_table** out) {
  return make_handle(out, [&] { return apnorm::run_norms(need(c, "config").c); });
}
apn_status apn_table_read_csv(const char* path, apn_table** out) {
  return make_handle(out, [&] { return apnorm::read_norms_csv(&need(path, "path")); });
}
void apn_table_free(apn_table* t) { delete t; }
size_t apn_table_rows(const apn_table* t) { return t ? t->rows.size() : 0; }
apn_status apn_table_row(const apn_table* t, size_t i, apn_norm_row* out) {
  return guard([&] {
    const auto& rows = need(t, "table").rows;
    need(out, "out");
    if (i >= rows.size()) throw OutOfRange("row index out of range");
    const auto& r = rows[i];
    *out = {r.lambda, r.p, r.lo, r.hi, r.K, r.tail, r.engine == "exact" ? APN_ENGINE_EXACT : APN_ENGINE_DFT};
  });
}
apn_status apn_table_csv(const apn_table* t, char** out) {
  return guard([&] {
    need(out, "out");
    *out = dup_string(apnorm::norms_csv(need(t, "table").rows));
  });
}

apn_status apn_fit_exponent(const apn_table* t, double p, const apn_window* window, apn_fit* out) {
  return guard([&] {
    need(out, "out");
    const auto f = apnorm::fit_exponent(need(t, "table").rows, p, to_cpp(window));
    *out = {f.exponent, f.intercept, f.stderr_, {f.window.lo, f.window.hi}, f.residual_max, f.points};
  });
}

apn_status apn_compare_envelopes(const apn_table* t, double p, apn_envelope kind, const apn_modulus* m,
                                 const apn_window* window, apn_envelope_summary* summary, apn_envelope_row* rows,
                                 size_t capacity) {
  return guard([&] {
    need(summary, "summary");
    if (capacity > 0) need(rows, "rows");
    const auto mod = needs_modulus(kind) ? need(m, "modulus").m : apnorm::Modulus::power(1.0);
    const auto cmp = apnorm::compare_envelopes(need(t, "table").rows, p, to_cpp(kind), mod, to_cpp(window));
    *summary = {cmp.constant, cmp.min_ratio, cmp.max_ratio, cmp.min_ratio_hi, cmp.max_ratio_hi, cmp.rows.size()};
    for (size_t i = 0; i < cmp.rows.size() && i < capacity; ++i) {
      const auto& r = cmp.rows[i];
      rows[i] = {r.lambda, r.envelope, r.ratio_mid, r.ratio_hi};
    }
  });
}

apn_status apn_witness_suite(const apn_config* c, apn_suite** out) {
  return make_handle(out, [&] { return apnorm::witness_suite(need(c, "config").c); });
}
void apn_suite_free(apn_suite* s) { delete s; }
apn_status apn_suite_summary_get(const apn_suite* s, apn_suite_summary* out) {
  return guard([&] {
    const auto& su = need(s, "suite").s;
    int final_failed = 0;
    for (const auto& f : su.final_checks) final_failed += f.holds ? 0 : 1;
    need(out, "out") = {su.passed,           su.failed,           su.min_margin,      su.lip_constant,
                        su.reports.size(),   su.final_checks.size(), final_failed,  su.warnings.size()};
  });
}
apn_status apn_suite_report(const apn_suite* s, size_t i, apn_witness_report* out) {
  return guard([&] {
    const auto& su = need(s, "suite").s;
    need(out, "out");
    if (i >= su.reports.size()) throw OutOfRange("report index out of range");
    *out = to_c(su.reports[i]);
  });
}
apn_status apn_suite_final(const apn_suite* s, size_t i, apn_final_check* out) {
  return guard([&] {
    const auto& su = need(s, "suite").s;
    need(out, "out");
    if (i >= su.final_checks.size()) throw OutOfRange("final check index out of range");
    const auto& f = su.final_checks[i];
    *out = {f.lambda, f.p, f.lhs, f.hi, f.holds ? 1 : 0};
  });
}
const char* apn_suite_warning(const apn_suite* s, size_t i) {
  if (!s || i >= s->s.warnings.size()) return nullptr;
  return s->s.warnings[i].c_str();
}
apn_status apn_suite_csv(const apn_suite* s, char** out) {
  return guard([&] {
    need(out, "out");
    *out = dup_string(apnorm::witness_csv(need(s, "suite").s));
  });
}

apn_status apn_plot(const apn_table* t, const apn_envelope* overlays, size_t n_overlays, const apn_modulus* m,
                    const char* path) {
  return guard([&] {
    const auto& rows = need(t, "table").rows;
    need(path, "path");
    if (n_overlays > 0) need(overlays, "overlays");
    std::vector<apnorm::PlotOverlay> ov;
    for (size_t i = 0; i < n_overlays; ++i) {
      const auto mod = needs_modulus(overlays[i]) ? need(m, "modulus").m : apnorm::Modulus::power(1.0);
      ov.push_back({to_cpp(overlays[i]), mod});
    }
    apnorm::emit_plot(rows, ov, path);
  });
}

}  // extern "C"
