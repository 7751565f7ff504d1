#include "scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>
#include <variant>

#include "boson.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "gauge.hpp"
#include "oracles.hpp"
#include "wei_norman.hpp"

namespace bdlie {

namespace {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---- parsing --------------------------------------------------------------

struct Errs {
  std::vector<std::string> list;
  void add(const std::string& path, const std::string& msg) {
    list.push_back(path + ": " + msg);
  }
};

void reject_unknown(const njson& j, const std::string& path,
                    std::initializer_list<const char*> allowed, Errs& errs) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) errs.add(path, "unknown key '" + it.key() + "'");
  }
}

bool need_object(const njson& j, const std::string& path, Errs& errs) {
  if (j.is_object()) return true;
  errs.add(path, "expected an object");
  return false;
}

std::optional<double> read_number(const njson& j, const std::string& path, Errs& errs) {
  if (!j.is_number()) {
    errs.add(path, "expected a number");
    return std::nullopt;
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    errs.add(path, "must be finite");
    return std::nullopt;
  }
  return v;
}

std::optional<std::vector<double>> read_array(const njson& j, const std::string& path,
                                              Errs& errs) {
  if (!j.is_array()) {
    errs.add(path, "expected an array of numbers");
    return std::nullopt;
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number() || !std::isfinite(j[i].get<double>())) {
      errs.add(path + "[" + std::to_string(i) + "]", "expected a finite number");
      return std::nullopt;
    }
    out.push_back(j[i].get<double>());
  }
  return out;
}

struct BuildRate {
  RateFamily operator()(ConstantRate r) const { return RateFamily::constant(r.c); }
  RateFamily operator()(ExponentialRate r) const { return RateFamily::exponential(r.c, r.a); }
  RateFamily operator()(SinusoidalRate r) const {
    return RateFamily::sinusoidal(r.c, r.eps, r.omega, r.phi);
  }
  RateFamily operator()(PiecewiseRate r) const {
    return RateFamily::piecewise(std::move(r.breakpoints), std::move(r.values));
  }
  RateFamily operator()(TabulatedRate r) const {
    return RateFamily::tabulated(std::move(r.times), std::move(r.values));
  }
};

std::optional<RateFamily> parse_rate(const njson& j, const std::string& path, Errs& errs) {
  if (!need_object(j, path, errs)) return std::nullopt;
  reject_unknown(j, path, {"kind", "params"}, errs);
  if (!j.contains("kind") || !j["kind"].is_string()) {
    errs.add(path, "missing string field 'kind'");
    return std::nullopt;
  }
  if (!j.contains("params") || !j["params"].is_object()) {
    errs.add(path, "missing object field 'params'");
    return std::nullopt;
  }
  const std::string kind = j["kind"].get<std::string>();
  const njson& p = j["params"];
  const std::string ppath = path + ".params";

  auto num_field = [&](const char* key) -> std::optional<double> {
    if (!p.contains(key)) {
      errs.add(ppath, std::string("missing field '") + key + "'");
      return std::nullopt;
    }
    return read_number(p[key], ppath + "." + key, errs);
  };
  auto arr_field = [&](const char* key) -> std::optional<std::vector<double>> {
    if (!p.contains(key)) {
      errs.add(ppath, std::string("missing field '") + key + "'");
      return std::nullopt;
    }
    return read_array(p[key], ppath + "." + key, errs);
  };

  std::optional<RateFamily::Variant> v;
  if (kind == "constant") {
    reject_unknown(p, ppath, {"c"}, errs);
    if (auto c = num_field("c")) v = ConstantRate{*c};
  } else if (kind == "exponential") {
    reject_unknown(p, ppath, {"c", "a"}, errs);
    auto c = num_field("c");
    auto a = num_field("a");
    if (c && a) v = ExponentialRate{*c, *a};
  } else if (kind == "sinusoidal") {
    reject_unknown(p, ppath, {"c", "eps", "omega", "phi"}, errs);
    auto c = num_field("c");
    auto e = num_field("eps");
    auto w = num_field("omega");
    auto f = num_field("phi");
    if (c && e && w && f) v = SinusoidalRate{*c, *e, *w, *f};
  } else if (kind == "piecewise_constant") {
    reject_unknown(p, ppath, {"breakpoints", "values"}, errs);
    auto b = arr_field("breakpoints");
    auto w = arr_field("values");
    if (b && w) v = PiecewiseRate{std::move(*b), std::move(*w)};
  } else if (kind == "tabulated") {
    reject_unknown(p, ppath, {"times", "values"}, errs);
    auto ts = arr_field("times");
    auto w = arr_field("values");
    if (ts && w) v = TabulatedRate{std::move(*ts), std::move(*w)};
  } else {
    errs.add(path, "unknown kind '" + kind + "'");
    return std::nullopt;
  }
  if (!v) return std::nullopt;
  const auto bad = RateFamily::check(*v);
  for (const auto& m : bad) errs.add(path, m);
  if (!bad.empty()) return std::nullopt;
  return std::visit(BuildRate{}, std::move(*v));
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SpecParts {
  std::optional<RateFamily> lambda, mu;
  double beta = 0;
  bool beta_ok = false;
  bool complete() const { return lambda && mu && beta_ok; }
};

SpecParts parse_spec_object(const njson& sp, Errs& errs) {
  SpecParts parts;
  reject_unknown(sp, "spec", {"lambda", "mu", "beta"}, errs);
  if (sp.contains("lambda"))
    parts.lambda = parse_rate(sp["lambda"], "spec.lambda", errs);
  else
    errs.add("spec", "missing field 'lambda'");
  if (sp.contains("mu"))
    parts.mu = parse_rate(sp["mu"], "spec.mu", errs);
  else
    errs.add("spec", "missing field 'mu'");
  if (sp.contains("beta")) {
    if (auto b = read_number(sp["beta"], "spec.beta", errs)) {
      if (*b < 0) {
        errs.add("spec.beta", "must be >= 0");
      } else {
        parts.beta = *b;
        parts.beta_ok = true;
      }
    }
  } else {
    errs.add("spec", "missing field 'beta'");
  }
  return parts;
}

[[noreturn]] void throw_errs(const Errs& errs) {
  std::string msg;
  if (errs.list.empty()) msg = "scenario: invalid";
  for (std::size_t i = 0; i < errs.list.size(); ++i) {
    if (i) msg += "; ";
    msg += errs.list[i];
  }
  throw std::invalid_argument(msg);
}

} // namespace

Scenario parse_scenario(const std::string& json_text) {
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const njson::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("scenario: top level must be an object");

  Errs errs;
  reject_unknown(j, "scenario", {"spec", "n0", "t_grid", "tail_tol", "ssa", "outputs"}, errs);

  SpecParts parts;
  if (!j.contains("spec")) {
    errs.add("scenario", "missing field 'spec'");
  } else if (need_object(j["spec"], "spec", errs)) {
    parts = parse_spec_object(j["spec"], errs);
  }

  long n0 = 1;
  if (!j.contains("n0")) {
    errs.add("scenario", "missing field 'n0'");
  } else if (!j["n0"].is_number_integer() && !j["n0"].is_number_unsigned()) {
    errs.add("n0", "expected a nonnegative integer");
  } else {
    const long long raw = j["n0"].get<long long>();
    if (raw < 0)
      errs.add("n0", "must be >= 0");
    else
      n0 = static_cast<long>(raw);
  }

  std::vector<double> t_grid;
  if (!j.contains("t_grid")) {
    errs.add("scenario", "missing field 't_grid'");
  } else if (auto g = read_array(j["t_grid"], "t_grid", errs)) {
    if (g->empty()) {
      errs.add("t_grid", "must be nonempty");
    } else {
      double prev = -1;
      bool ok = true;
      for (double t : *g) {
        if (t < 0) {
          errs.add("t_grid", "entries must be >= 0");
          ok = false;
          break;
        }
        if (t <= prev) {
          errs.add("t_grid", "entries must increase strictly");
          ok = false;
          break;
        }
        prev = t;
      }
      if (ok) t_grid = std::move(*g);
    }
  }

  double tail_tol = 1e-10;
  if (j.contains("tail_tol")) {
    if (auto v = read_number(j["tail_tol"], "tail_tol", errs)) {
      if (!(*v > 0) || *v > 1e-3)
        errs.add("tail_tol", "must lie in (0, 1e-3]");
      else
        tail_tol = *v;
    }
  }

  std::optional<SsaSettings> ssa;
  if (j.contains("ssa")) {
    const njson& s = j["ssa"];
    if (need_object(s, "ssa", errs)) {
      reject_unknown(s, "ssa", {"R", "seed"}, errs);
      SsaSettings st;
      bool ok = true;
      if (!s.contains("R")) {
        errs.add("ssa", "missing field 'R'");
        ok = false;
      } else if (!s["R"].is_number_integer() && !s["R"].is_number_unsigned()) {
        errs.add("ssa.R", "expected a positive integer");
        ok = false;
      } else {
        const long long r = s["R"].get<long long>();
        if (r < 1) {
          errs.add("ssa.R", "must be >= 1");
          ok = false;
        } else {
          st.trajectories = static_cast<std::size_t>(r);
        }
      }
      if (!s.contains("seed")) {
        errs.add("ssa", "missing field 'seed'");
        ok = false;
      } else if (!(s["seed"].is_number_unsigned() ||
                   (s["seed"].is_number_integer() && s["seed"].get<long long>() >= 0))) {
        errs.add("ssa.seed", "expected a nonnegative integer");
        ok = false;
      } else {
        st.seed = s["seed"].get<std::uint64_t>();
      }
      if (ok) ssa = st;
    }
  }

  std::string format = "csv";
  if (j.contains("outputs")) {
    const njson& o = j["outputs"];
    if (need_object(o, "outputs", errs)) {
      reject_unknown(o, "outputs", {"format"}, errs);
      if (o.contains("format")) {
        if (!o["format"].is_string()) {
          errs.add("outputs.format", "expected a string");
        } else {
          format = o["format"].get<std::string>();
          if (format != "csv" && format != "json")
            errs.add("outputs.format", "must be 'csv' or 'json'");
        }
      }
    }
  }

  if (parts.complete() && !t_grid.empty()) {
    ProcessSpec spec{std::move(*parts.lambda), std::move(*parts.mu), parts.beta};
    if (spec.span_end() < t_grid.back())
      errs.add("t_grid", "extends beyond the tabulated rate span");
    for (const auto& v : validate_spec(spec).violations) errs.add("spec", v);
    if (errs.list.empty())
      return Scenario{std::move(spec), n0, std::move(t_grid), tail_tol, ssa, format};
  }
  throw_errs(errs);
}

ProcessSpec parse_process_spec(const std::string& json_text) {
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const njson::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("scenario: spec must be an object");
  Errs errs;
  SpecParts parts = parse_spec_object(j, errs);
  if (parts.complete()) {
    ProcessSpec spec{std::move(*parts.lambda), std::move(*parts.mu), parts.beta};
    for (const auto& v : validate_spec(spec).violations) errs.add("spec", v);
    if (errs.list.empty()) return spec;
  }
  throw_errs(errs);
}

namespace {

ojson rate_to_json(const RateFamily& r) {
  ojson out;
  out["kind"] = r.kind();
  ojson p;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantRate>) {
          p["c"] = v.c;
        } else if constexpr (std::is_same_v<T, ExponentialRate>) {
          p["c"] = v.c;
          p["a"] = v.a;
        } else if constexpr (std::is_same_v<T, SinusoidalRate>) {
          p["c"] = v.c;
          p["eps"] = v.eps;
          p["omega"] = v.omega;
          p["phi"] = v.phi;
        } else if constexpr (std::is_same_v<T, PiecewiseRate>) {
          p["breakpoints"] = v.breakpoints;
          p["values"] = v.values;
        } else {
          p["times"] = v.times;
          p["values"] = v.values;
        }
      },
      r.raw());
  out["params"] = std::move(p);
  return out;
}

} // namespace

std::string scenario_to_json(const Scenario& sc) {
  ojson j;
  ojson spec;
  spec["lambda"] = rate_to_json(sc.spec.lambda);
  spec["mu"] = rate_to_json(sc.spec.mu);
  spec["beta"] = sc.spec.beta;
  j["spec"] = std::move(spec);
  j["n0"] = sc.n0;
  j["t_grid"] = sc.t_grid;
  j["tail_tol"] = sc.tail_tol;
  if (sc.ssa) {
    ojson s;
    s["R"] = sc.ssa->trajectories;
    s["seed"] = sc.ssa->seed;
    j["ssa"] = std::move(s);
  }
  ojson o;
  o["format"] = sc.format;
  j["outputs"] = std::move(o);
  return j.dump(2) + "\n";
}

// ---- commands --------------------------------------------------------------

namespace {

const char* error_class_name(const std::exception& e) {
  if (dynamic_cast<const IntegrationError*>(&e)) return "integration";
  if (dynamic_cast<const OverflowError*>(&e)) return "overflow";
  if (dynamic_cast<const SingularError*>(&e)) return "singular";
  if (dynamic_cast<const TruncationError*>(&e)) return "truncation";
  if (dynamic_cast<const TailError*>(&e)) return "tail";
  if (dynamic_cast<const NotClosedError*>(&e)) return "not_closed";
  if (dynamic_cast<const GaugeInconsistencyError*>(&e)) return "gauge_inconsistency";
  if (dynamic_cast<const std::domain_error*>(&e)) return "domain";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
  return "internal";
}

ojson failure_json(const std::exception& e) {
  ojson err;
  err["failed"] = true;
  err["error_class"] = error_class_name(e);
  err["error"] = e.what();
  return err;
}

void cmd_gauge(const Scenario& sc, RunResult& res) {
  const auto table = compute_gauge(sc.spec, sc.t_grid);
  if (sc.format == "csv") {
    std::string out = "t,rho,W,g1,g2,g3,g4\n";
    for (const auto& g : table)
      out += fmt_g(g.t) + "," + fmt_g(g.rho) + "," + fmt_g(g.W) + "," + fmt_g(g.g1) + "," +
             fmt_g(g.g2) + "," + fmt_g(g.g3) + "," + fmt_g(g.g4) + "\n";
    res.artifacts.push_back({"gauge.csv", std::move(out)});
  } else {
    ojson pts = ojson::array();
    for (const auto& g : table) {
      ojson p;
      p["t"] = g.t;
      p["rho"] = g.rho;
      p["W"] = g.W;
      p["g1"] = g.g1;
      p["g2"] = g.g2;
      p["g3"] = g.g3;
      p["g4"] = g.g4;
      pts.push_back(std::move(p));
    }
    ojson j;
    j["points"] = std::move(pts);
    res.artifacts.push_back({"gauge.json", j.dump(2) + "\n"});
  }
  res.summary = "gauge table at " + std::to_string(table.size()) + " times";
}

void cmd_pmf(const Scenario& sc, RunResult& res) {
  PmfOptions po;
  po.tail_tol = sc.tail_tol;
  double worst_tail = 0;
  std::string first_error;
  for (std::size_t i = 0; i < sc.t_grid.size(); ++i) {
    const std::string stem = "pmf_" + std::to_string(i);
    try {
      const auto pmf = transition_pmf(sc.spec, sc.t_grid[i], sc.n0, po);
      worst_tail = std::max(worst_tail, std::abs(pmf.tail_mass));
      if (sc.format == "csv") {
        std::string out = "# t = " + fmt_g(pmf.t) + "\n# n0 = " + std::to_string(pmf.n0) +
                          "\nm,prob\n";
        for (std::size_t m = 0; m < pmf.probs.size(); ++m)
          out += std::to_string(m) + "," + fmt_g(pmf.probs[m]) + "\n";
        out += "# tail_mass = " + fmt_g(pmf.tail_mass) + "\n";
        out += "# gauge_error_budget = " + fmt_g(pmf.gauge_error_budget) + "\n";
        res.artifacts.push_back({stem + ".csv", std::move(out)});
      } else {
        ojson j;
        j["n0"] = pmf.n0;
        j["t"] = pmf.t;
        j["beta"] = sc.spec.beta;
        j["probs"] = pmf.probs;
        j["tail_mass"] = pmf.tail_mass;
        j["gauge_error_budget"] = pmf.gauge_error_budget;
        res.artifacts.push_back({stem + ".json", j.dump(2) + "\n"});
      }
    } catch (const std::exception& e) {
      res.artifacts.push_back({stem + "_error.json", failure_json(e).dump(2) + "\n"});
      if (res.exit_code == kOk) res.exit_code = classify_error(e);
      if (first_error.empty()) first_error = e.what();
    }
  }
  res.summary = first_error.empty()
                    ? "pmf at " + std::to_string(sc.t_grid.size()) +
                          " times, worst |tail_mass| = " + fmt_g(worst_tail)
                    : "pmf failed: " + first_error;
}

void cmd_mean(const Scenario& sc, RunResult& res) {
  PmfOptions po;
  po.tail_tol = sc.tail_tol;
  std::string csv = "t,mean_from_one,mean_pmf_n0\n";
  ojson pts = ojson::array();
  double last_closed = 0, last_pmf = 0;
  for (double t : sc.t_grid) {
    const double closed = mean_from_one(sc.spec, t);
    const auto pmf = transition_pmf(sc.spec, t, sc.n0, po);
    const double numeric = moment_numeric(pmf, 1).value;
    last_closed = closed;
    last_pmf = numeric;
    if (sc.format == "csv") {
      csv += fmt_g(t) + "," + fmt_g(closed) + "," + fmt_g(numeric) + "\n";
    } else {
      ojson p;
      p["t"] = t;
      p["mean_from_one"] = closed;
      p["mean_pmf_n0"] = numeric;
      pts.push_back(std::move(p));
    }
  }
  if (sc.format == "csv") {
    res.artifacts.push_back({"mean.csv", std::move(csv)});
  } else {
    ojson j;
    j["n0"] = sc.n0;
    j["points"] = std::move(pts);
    res.artifacts.push_back({"mean.json", j.dump(2) + "\n"});
  }
  res.summary = "mean at t = " + fmt_g(sc.t_grid.back()) + ": from-one " + fmt_g(last_closed) +
                ", pmf(n0=" + std::to_string(sc.n0) + ") " + fmt_g(last_pmf);
}

void cmd_simulate(const Scenario& sc, RunResult& res) {
  if (!sc.ssa) {
    res.exit_code = kUsage;
    res.summary = "simulate needs an 'ssa' block in the scenario (or --trajectories/--seed)";
    return;
  }
  const double t = sc.t_grid.back();
  const auto ens = ssa_ensemble(sc.spec, sc.n0, t, sc.ssa->trajectories, sc.ssa->seed);
  double emp_mean = 0;
  for (std::size_t m = 0; m < ens.phat.size(); ++m) emp_mean += static_cast<double>(m) * ens.phat[m];
  if (sc.format == "csv") {
    std::string out = "# t = " + fmt_g(t) + "\n# n0 = " + std::to_string(sc.n0) +
                      "\n# R = " + std::to_string(ens.trajectories) +
                      "\n# seed = " + std::to_string(ens.seed) + "\nm,count,phat,stderr\n";
    for (std::size_t m = 0; m < ens.counts.size(); ++m)
      out += std::to_string(m) + "," + std::to_string(ens.counts[m]) + "," + fmt_g(ens.phat[m]) +
             "," + fmt_g(ens.stderr_[m]) + "\n";
    res.artifacts.push_back({"ensemble.csv", std::move(out)});
  } else {
    ojson j;
    j["t"] = t;
    j["n0"] = sc.n0;
    j["R"] = ens.trajectories;
    j["seed"] = ens.seed;
    j["counts"] = ens.counts;
    j["phat"] = ens.phat;
    j["stderr"] = ens.stderr_;
    res.artifacts.push_back({"ensemble.json", j.dump(2) + "\n"});
  }
  res.summary = "simulated " + std::to_string(ens.trajectories) + " trajectories to t = " +
                fmt_g(t) + ", empirical mean " + fmt_g(emp_mean);
}

void cmd_oracle(const Scenario& sc, RunResult& res) {
  const auto dists = integrate_master_grid(sc.spec, sc.n0, sc.t_grid);
  if (sc.format == "csv") {
    for (std::size_t i = 0; i < dists.size(); ++i) {
      const auto& d = dists[i];
      std::string out = "# t = " + fmt_g(d.t) + "\n# n0 = " + std::to_string(d.n0) +
                        "\n# n_max = " + std::to_string(d.n_max) + "\nm,prob\n";
      for (std::size_t m = 0; m < d.probs.size(); ++m)
        out += std::to_string(m) + "," + fmt_g(d.probs[m]) + "\n";
      out += "# leaked_mass = " + fmt_g(d.leaked_mass) + "\n";
      res.artifacts.push_back({"oracle_" + std::to_string(i) + ".csv", std::move(out)});
    }
  } else {
    ojson arr = ojson::array();
    for (const auto& d : dists) {
      ojson e;
      e["t"] = d.t;
      e["n0"] = d.n0;
      e["n_max"] = d.n_max;
      e["leaked_mass"] = d.leaked_mass;
      e["probs"] = d.probs;
      arr.push_back(std::move(e));
    }
    ojson j;
    j["distributions"] = std::move(arr);
    res.artifacts.push_back({"oracle.json", j.dump(2) + "\n"});
  }
  res.summary = "master equation on 0.." + std::to_string(dists.back().n_max) +
                ", final leaked mass " + fmt_g(dists.back().leaked_mass);
}

void cmd_closure(const Scenario& sc, RunResult& res) {
  ojson sets = ojson::array();
  const auto prod = lie_closure(product_basis(), product_basis_labels());
  const auto naive = lie_closure(naive_basis(), naive_basis_labels());
  const std::pair<const char*, const ClosureReport*> reports[] = {
      {"factorization_order", &prod}, {"naive", &naive}};
  for (const auto& [name, rep] : reports) {
    ojson s;
    s["name"] = name;
    s["closed"] = rep->closed;
    s["dimension"] = rep->dimension;
    s["max_dim"] = rep->max_dim;
    s["labels"] = rep->labels;
    s["witness"] = rep->witness;
    sets.push_back(std::move(s));
  }
  ojson scj;
  scj["labels"] = product_basis_labels();
  scj["beta"] = sc.spec.beta;
  scj["c"] = structure_constants(product_basis(), sc.spec.beta);
  ojson j;
  j["sets"] = std::move(sets);
  j["structure_constants"] = std::move(scj);
  res.artifacts.push_back({"closure.json", j.dump(2) + "\n"});
  res.summary = "factorization-order set " +
                std::string(prod.closed ? "closes" : "DOES NOT close") + " at dimension " +
                std::to_string(prod.dimension) + "; naive set " +
                (naive.closed ? "closes" : "escapes (cutoff " + std::to_string(naive.max_dim) + ")");
}

void cmd_verify(const Scenario& sc, RunResult& res) {
  ojson checks = ojson::array();
  bool all = true;
  auto add = [&](const std::string& name, double t, double value, double threshold) {
    const bool pass = value <= threshold;
    ojson c;
    c["name"] = name;
    if (t >= 0) c["t"] = t;
    c["value"] = value;
    c["threshold"] = threshold;
    c["pass"] = pass;
    checks.push_back(std::move(c));
    all = all && pass;
  };

  // 1. gauge table and the coupled velocity-equation residuals
  const auto table = compute_gauge(sc.spec, sc.t_grid);
  double worst_res = 0;
  for (const auto& g : table) {
    const auto dg = gauge_derivatives(sc.spec, g);
    const auto r = riccati_residual(sc.spec, g, dg);
    for (double v : r) worst_res = std::max(worst_res, std::abs(v));
  }
  add("velocity_equation_residual", -1, worst_res, 1e-8);

  // 2. generic product-of-exponentials engine against the closed-form pass
  {
    LieAlgebraSpec alg{product_basis_labels(),
                      structure_constants(product_basis(), sc.spec.beta)};
    const auto mesh = sc.spec.mesh(0, sc.t_grid.back());
    const auto wn = integrate_wn(alg, process_coefficients(sc.spec), sc.t_grid, mesh);
    double worst = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
      worst = std::max(worst, std::abs(wn[i].g[0] - table[i].g1));
      worst = std::max(worst, std::abs(wn[i].g[1] - table[i].g2));
      worst = std::max(worst, std::abs(wn[i].g[2] - table[i].g3));
      worst = std::max(worst, std::abs(wn[i].g[3] - table[i].g4));
    }
    add("generic_engine_vs_closed_form", -1, worst, 1e-8);
  }

  // 3. constant-rate closed forms against the ODE pass
  if (sc.spec.is_constant()) {
    double worst = 0;
    for (const auto& g : table) {
      const auto cf = constant_rate_gauge(sc.spec, g.t);
      const double pairs[4][2] = {
          {g.g1, cf.g1}, {g.g2, cf.g2}, {g.g3, cf.g3}, {g.g4, cf.g4}};
      for (const auto& pr : pairs) {
        const double scale = std::max({std::abs(pr[1]), 1e-12});
        worst = std::max(worst, std::abs(pr[0] - pr[1]) / scale);
      }
    }
    add("constant_closed_form_rel", -1, worst, 1e-9);
  }

  // 4./5. per-time pmf normalization, master-equation match, mean cross-check
  PmfOptions po;
  po.tail_tol = sc.tail_tol;
  const auto masters = integrate_master_grid(sc.spec, sc.n0, sc.t_grid);
  std::optional<TransitionPmf> last_pmf;
  for (std::size_t i = 0; i < sc.t_grid.size(); ++i) {
    const double t = sc.t_grid[i];
    auto pmf = transition_pmf(sc.spec, t, sc.n0, po);
    add("pmf_normalization", t, std::abs(pmf.tail_mass), std::max(10 * sc.tail_tol, 1e-8));
    const auto rep = compare_report(pmf, &masters[i], nullptr);
    add("pmf_vs_master", t, rep.max_abs_diff, 1e-8);
    if (sc.n0 == 1) {
      const double closed = mean_from_one(sc.spec, t);
      const double numeric = moment_numeric(pmf, 1).value;
      const double rel = std::abs(numeric - closed) / std::max(std::abs(closed), 1e-12);
      add("mean_closed_vs_pmf_rel", t, rel, 1e-7);
    }
    last_pmf = std::move(pmf);
  }

  // 6. stochastic ensemble at the final time
  if (sc.ssa) {
    const auto ens =
        ssa_ensemble(sc.spec, sc.n0, sc.t_grid.back(), sc.ssa->trajectories, sc.ssa->seed);
    const auto rep = compare_report(*last_pmf, nullptr, &ens);
    ojson c;
    c["name"] = "pmf_vs_ssa_z";
    c["t"] = sc.t_grid.back();
    c["value"] = rep.worst_abs_z;
    c["threshold"] = 4.0;
    c["pass"] = rep.pass_ssa;
    c["detail"] = rep.summary;
    checks.push_back(std::move(c));
    all = all && rep.pass_ssa;
  }

  ojson j;
  j["pass"] = all;
  j["checks"] = std::move(checks);
  res.artifacts.push_back({"verify.json", j.dump(2) + "\n"});
  res.exit_code = all ? kOk : kVerifyFailed;
  res.summary = std::string("verify: ") + (all ? "PASS" : "FAIL") + " (" +
                std::to_string(j["checks"].size()) + " checks)";
}

} // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"gauge",  "pmf",    "mean",   "simulate",
                                                 "oracle", "verify", "closure"};
  return names;
}

int classify_error(const std::exception& e) {
  if (dynamic_cast<const IntegrationError*>(&e)) return kIntegration;
  if (dynamic_cast<const OverflowError*>(&e)) return kOverflow;
  if (dynamic_cast<const SingularError*>(&e)) return kSingular;
  if (dynamic_cast<const TruncationError*>(&e)) return kTruncation;
  if (dynamic_cast<const TailError*>(&e)) return kTail;
  if (dynamic_cast<const NotClosedError*>(&e)) return kNotClosed;
  if (dynamic_cast<const GaugeInconsistencyError*>(&e)) return kInternal;
  if (dynamic_cast<const std::domain_error*>(&e)) return kDomain;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kParse;
  return kInternal;
}

RunResult run_command(const std::string& command, const Scenario& sc, const RunOverrides& ov) {
  RunResult res;
  Scenario eff = sc;
  if (ov.format) eff.format = *ov.format;
  if (ov.tail_tol) eff.tail_tol = *ov.tail_tol;
  if (ov.trajectories || ov.seed) {
    SsaSettings st = eff.ssa.value_or(SsaSettings{});
    if (ov.trajectories) st.trajectories = *ov.trajectories;
    if (ov.seed) st.seed = *ov.seed;
    eff.ssa = st;
  }
  if (eff.format != "csv" && eff.format != "json") {
    res.exit_code = kUsage;
    res.summary = "unknown format '" + eff.format + "'";
    return res;
  }
  if (!(eff.tail_tol > 0) || eff.tail_tol > 1e-3) {
    res.exit_code = kUsage;
    res.summary = "tail_tol must lie in (0, 1e-3]";
    return res;
  }

  try {
    if (command == "gauge")
      cmd_gauge(eff, res);
    else if (command == "pmf")
      cmd_pmf(eff, res);
    else if (command == "mean")
      cmd_mean(eff, res);
    else if (command == "simulate")
      cmd_simulate(eff, res);
    else if (command == "oracle")
      cmd_oracle(eff, res);
    else if (command == "verify")
      cmd_verify(eff, res);
    else if (command == "closure")
      cmd_closure(eff, res);
    else {
      res.exit_code = kUsage;
      res.summary = "unknown command '" + command + "'";
    }
  } catch (const std::exception& e) {
    res.exit_code = classify_error(e);
    res.artifacts.push_back({command + "_error.json", failure_json(e).dump(2) + "\n"});
    res.summary = command + " failed: " + e.what();
  }
  return res;
}

} // namespace bdlie
