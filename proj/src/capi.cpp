#include "bdlie/bdlie.h"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <utility>

#include "distributions.hpp"
#include "gauge.hpp"
#include "scenario.hpp"

struct bdlie_process {
  bdlie::ProcessSpec spec;
};
struct bdlie_scenario {
  bdlie::Scenario sc;
};
struct bdlie_result {
  bdlie::RunResult r;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_err(char** err_msg, const std::string& s) {
  if (err_msg) *err_msg = dup_string(s);
}

template <class F>
bdlie_status guarded(char** err_msg, F&& f) {
  try {
    return f();
  } catch (const std::bad_alloc&) {
    set_err(err_msg, "out of memory");
    return BDLIE_INTERNAL;
  } catch (const std::exception& e) {
    set_err(err_msg, e.what());
    return static_cast<bdlie_status>(bdlie::classify_error(e));
  } catch (...) {
    set_err(err_msg, "unknown error");
    return BDLIE_INTERNAL;
  }
}

bool bad_time(double t) { return !(t >= 0) || !std::isfinite(t); }

void fill_gauge(const bdlie::GaugeState& g, double* out) {
  out[0] = g.rho;
  out[1] = g.W;
  out[2] = g.g1;
  out[3] = g.g2;
  out[4] = g.g3;
  out[5] = g.g4;
}

} // namespace

extern "C" {

#ifndef BDLIE_VERSION
#define BDLIE_VERSION "0.0.0"
#endif

const char* bdlie_version(void) { return BDLIE_VERSION; }

bdlie_status bdlie_process_from_json(const char* spec_json, bdlie_process** out,
                                     char** err_msg) {
  if (!spec_json || !out) {
    set_err(err_msg, "null argument");
    return BDLIE_USAGE;
  }
  return guarded(err_msg, [&] {
    *out = new bdlie_process{bdlie::parse_process_spec(spec_json)};
    return BDLIE_OK;
  });
}

void bdlie_process_free(bdlie_process* p) { delete p; }

bdlie_status bdlie_gauge_at(const bdlie_process* p, double t, double out[6], char** err_msg) {
  if (!p || !out) {
    set_err(err_msg, "null argument");
    return BDLIE_USAGE;
  }
  if (bad_time(t)) {
    set_err(err_msg, "time must be finite and >= 0");
    return BDLIE_DOMAIN;
  }
  return guarded(err_msg, [&] {
    fill_gauge(bdlie::gauge_at(p->spec, t), out);
    return BDLIE_OK;
  });
}

bdlie_status bdlie_gauge_table(const bdlie_process* p, const double* times, size_t n_times,
                               double* out, char** err_msg) {
  if (!p || !times || !out || n_times == 0) {
    set_err(err_msg, "null argument or empty grid");
    return BDLIE_USAGE;
  }
  return guarded(err_msg, [&] {
    const std::span<const double> grid(times, n_times);
    if (p->spec.is_constant()) {
      double prev = -1;
      for (size_t i = 0; i < n_times; ++i) {
        if (bad_time(grid[i]) || grid[i] <= prev)
          throw std::invalid_argument("times must be finite, >= 0 and strictly increasing");
        prev = grid[i];
        fill_gauge(bdlie::constant_rate_gauge(p->spec, grid[i]), out + 6 * i);
      }
    } else {
      const auto table = bdlie::compute_gauge(p->spec, grid);
      for (size_t i = 0; i < table.size(); ++i) fill_gauge(table[i], out + 6 * i);
    }
    return BDLIE_OK;
  });
}

bdlie_status bdlie_log_transition_prob(const bdlie_process* p, double t, long n0, long m,
                                       double* out, char** err_msg) {
  if (!p || !out) {
    set_err(err_msg, "null argument");
    return BDLIE_USAGE;
  }
  if (bad_time(t)) {
    set_err(err_msg, "time must be finite and >= 0");
    return BDLIE_DOMAIN;
  }
  return guarded(err_msg, [&] {
    const auto g = bdlie::gauge_at(p->spec, t, bdlie::GaugeOptions{1e-12, 1e-14});
    *out = bdlie::log_transition_prob(p->spec, g, n0, m);
    return BDLIE_OK;
  });
}

bdlie_status bdlie_transition_pmf(const bdlie_process* p, double t, long n0, double tail_tol,
                                  double** probs, size_t* n_probs, double* tail_mass,
                                  char** err_msg) {
  if (!p || !probs || !n_probs || !tail_mass) {
    set_err(err_msg, "null argument");
    return BDLIE_USAGE;
  }
  if (bad_time(t)) {
    set_err(err_msg, "time must be finite and >= 0");
    return BDLIE_DOMAIN;
  }
  return guarded(err_msg, [&] {
    bdlie::PmfOptions po;
    po.tail_tol = tail_tol;
    const auto pmf = bdlie::transition_pmf(p->spec, t, n0, po);
    double* buf = static_cast<double*>(std::malloc(pmf.probs.size() * sizeof(double)));
    if (!buf) {
      set_err(err_msg, "out of memory");
      return BDLIE_INTERNAL;
    }
    std::memcpy(buf, pmf.probs.data(), pmf.probs.size() * sizeof(double));
    *probs = buf;
    *n_probs = pmf.probs.size();
    *tail_mass = pmf.tail_mass;
    return BDLIE_OK;
  });
}

bdlie_status bdlie_mean_from_one(const bdlie_process* p, double t, double* out,
                                 char** err_msg) {
  if (!p || !out) {
    set_err(err_msg, "null argument");
    return BDLIE_USAGE;
  }
  if (bad_time(t)) {
    set_err(err_msg, "time must be finite and >= 0");
    return BDLIE_DOMAIN;
  }
  return guarded(err_msg, [&] {
    *out = bdlie::mean_from_one(p->spec, t);
    return BDLIE_OK;
  });
}

bdlie_status bdlie_scenario_parse(const char* json_text, bdlie_scenario** out, char** err_msg) {
  if (!json_text || !out) {
    set_err(err_msg, "null argument");
    return BDLIE_USAGE;
  }
  return guarded(err_msg, [&] {
    *out = new bdlie_scenario{bdlie::parse_scenario(json_text)};
    return BDLIE_OK;
  });
}

void bdlie_scenario_free(bdlie_scenario* sc) { delete sc; }

char* bdlie_scenario_canonical_json(const bdlie_scenario* sc) {
  if (!sc) return nullptr;
  try {
    return dup_string(bdlie::scenario_to_json(sc->sc));
  } catch (...) {
    return nullptr;
  }
}

bdlie_status bdlie_run(const bdlie_scenario* sc, const char* command,
                       const char* overrides_json, bdlie_result** out, char** err_msg) {
  if (!sc || !command || !out) {
    set_err(err_msg, "null argument");
    return BDLIE_USAGE;
  }
  bdlie::RunOverrides ov;
  if (overrides_json && *overrides_json) {
    try {
      const auto j = nlohmann::json::parse(overrides_json);
      if (!j.is_object()) throw std::invalid_argument("overrides: expected an object");
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "format" && it.value().is_string())
          ov.format = it.value().get<std::string>();
        else if (it.key() == "seed" && it.value().is_number_integer() &&
                 (it.value().is_number_unsigned() || it.value().get<long long>() >= 0))
          ov.seed = it.value().get<std::uint64_t>();
        else if (it.key() == "trajectories" && it.value().is_number_integer() &&
                 it.value().get<long long>() > 0)
          ov.trajectories = it.value().get<std::size_t>();
        else if (it.key() == "tail_tol" && it.value().is_number())
          ov.tail_tol = it.value().get<double>();
        else
          throw std::invalid_argument("overrides: bad key or value '" + it.key() + "'");
      }
    } catch (const std::exception& e) {
      set_err(err_msg, e.what());
      return BDLIE_USAGE;
    }
  }
  return guarded(err_msg, [&] {
    auto res = bdlie::run_command(command, sc->sc, ov);
    *out = new bdlie_result{std::move(res)};
    return BDLIE_OK;
  });
}

int bdlie_result_exit_code(const bdlie_result* r) { return r ? r->r.exit_code : BDLIE_USAGE; }

const char* bdlie_result_summary(const bdlie_result* r) {
  return r ? r->r.summary.c_str() : "";
}

size_t bdlie_result_artifact_count(const bdlie_result* r) {
  return r ? r->r.artifacts.size() : 0;
}

const char* bdlie_result_artifact_name(const bdlie_result* r, size_t i) {
  if (!r || i >= r->r.artifacts.size()) return nullptr;
  return r->r.artifacts[i].name.c_str();
}

const char* bdlie_result_artifact_text(const bdlie_result* r, size_t i) {
  if (!r || i >= r->r.artifacts.size()) return nullptr;
  return r->r.artifacts[i].text.c_str();
}

void bdlie_result_free(bdlie_result* r) { delete r; }

void bdlie_string_free(char* s) { std::free(s); }

void bdlie_buffer_free(double* b) { std::free(b); }

} // extern "C"
