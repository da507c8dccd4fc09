#include "uporo/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace uporo {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct RawConfig {
  // section -> key -> value, plus line numbers for messages
  std::map<std::string, std::map<std::string, std::string>> values;
  std::vector<std::string> errors;
};

RawConfig lex(const std::string& text) {
  RawConfig raw;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        raw.errors.push_back("line " + std::to_string(lineno) +
                             ": malformed section header");
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      raw.values.try_emplace(section);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      raw.errors.push_back("line " + std::to_string(lineno) +
                           ": expected key = value");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      raw.errors.push_back("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    if (!raw.values[section].emplace(key, value).second)
      raw.errors.push_back(section + "." + key + ": duplicate key");
  }
  return raw;
}

class Reader {
 public:
  Reader(RawConfig raw, std::vector<std::string>& errors)
      : raw_(std::move(raw)), errors_(errors) {
    for (auto e : raw_.errors) errors_.push_back(std::move(e));
  }

  bool has(const std::string& sec, const std::string& key) {
    auto s = raw_.values.find(sec);
    if (s == raw_.values.end()) return false;
    return s->second.count(key) > 0;
  }

  template <typename T, typename Parser>
  void get(const std::string& sec, const std::string& key, T& out,
           Parser parse) {
    claimed_[sec].insert(key);
    auto s = raw_.values.find(sec);
    if (s == raw_.values.end()) return;
    auto it = s->second.find(key);
    if (it == s->second.end()) return;
    if (!parse(it->second, out))
      errors_.push_back(sec + "." + key + ": cannot parse '" + it->second +
                        "'");
  }

  void get_double(const std::string& sec, const std::string& key, double& out) {
    get(sec, key, out, [](const std::string& v, double& o) {
      try {
        std::size_t pos;
        o = std::stod(v, &pos);
        return pos == v.size();
      } catch (...) {
        return false;
      }
    });
  }

  void get_int(const std::string& sec, const std::string& key, int& out) {
    get(sec, key, out, [](const std::string& v, int& o) {
      try {
        std::size_t pos;
        o = std::stoi(v, &pos);
        return pos == v.size();
      } catch (...) {
        return false;
      }
    });
  }

  void get_unsigned(const std::string& sec, const std::string& key,
                    unsigned& out) {
    int tmp = int(out);
    get_int(sec, key, tmp);
    if (tmp < 0)
      errors_.push_back(sec + "." + key + ": must be nonnegative");
    else
      out = unsigned(tmp);
  }

  void get_bool(const std::string& sec, const std::string& key, bool& out) {
    get(sec, key, out, [](const std::string& v, bool& o) {
      if (v == "true" || v == "1" || v == "yes") return o = true, true;
      if (v == "false" || v == "0" || v == "no") return o = false, true;
      return false;
    });
  }

  void get_string(const std::string& sec, const std::string& key,
                  std::string& out) {
    get(sec, key, out, [](const std::string& v, std::string& o) {
      o = v;
      return true;
    });
  }

  void get_int_list(const std::string& sec, const std::string& key,
                    std::vector<int>& out) {
    std::string joined;
    get_string(sec, key, joined);
    if (joined.empty()) return;
    out.clear();
    std::istringstream is(joined);
    std::string item;
    while (std::getline(is, item, ',')) {
      try {
        out.push_back(std::stoi(trim(item)));
      } catch (...) {
        errors_.push_back(sec + "." + key + ": bad integer '" + item + "'");
        return;
      }
    }
  }

  void get_double_list(const std::string& sec, const std::string& key,
                       std::vector<double>& out) {
    std::string joined;
    get_string(sec, key, joined);
    if (joined.empty()) return;
    out.clear();
    std::istringstream is(joined);
    std::string item;
    while (std::getline(is, item, ',')) {
      try {
        out.push_back(std::stod(trim(item)));
      } catch (...) {
        errors_.push_back(sec + "." + key + ": bad number '" + item + "'");
        return;
      }
    }
  }

  /// After all gets: reject anything not claimed.
  void finish() {
    for (const auto& [sec, kv] : raw_.values) {
      auto c = claimed_.find(sec);
      if (c == claimed_.end()) {
        errors_.push_back("[" + sec + "]: unknown section");
        continue;
      }
      for (const auto& [key, value] : kv)
        if (!c->second.count(key))
          errors_.push_back(sec + "." + key + ": unknown key");
    }
  }

 private:
  RawConfig raw_;
  std::vector<std::string>& errors_;
  std::map<std::string, std::set<std::string>> claimed_;
};

void validate(const RunConfig& c, std::vector<std::string>& errors) {
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  const std::vector<std::string> scenarios{"zero",     "steady",
                                           "drainage", "terzaghi",
                                           "mms-saturated", "mms-unsaturated"};
  check(std::find(scenarios.begin(), scenarios.end(), c.scenario) !=
            scenarios.end(),
        "scenario.name: unknown scenario '" + c.scenario + "'");
  check(c.nx >= 1 && c.ny >= 1, "mesh.nx/ny: must be >= 1");
  check(c.lx > 0 && c.ly > 0, "mesh.lx/ly: must be > 0");
  check(c.t_end > 0, "time.t_end: must be > 0");
  check(c.steps >= 0, "time.steps: must be >= 0");
  check(c.material.mu > 0, "material.mu: must be > 0");
  check(c.material.lambda >= 0, "material.lambda: must be >= 0");
  check(c.material.alpha_biot >= 0 && c.material.alpha_biot <= 1,
        "material.alpha_biot: must lie in [0,1]");
  check(c.material.c_w >= 0, "material.c_w: must be >= 0");
  check(c.material.inv_n >= 0, "material.inv_n: must be >= 0");
  check(c.material.phi0 > 0 && c.material.phi0 < 1,
        "material.phi0: must lie in (0,1)");
  check(c.material.kappa_abs > 0, "material.kappa_abs: must be > 0");
  check(c.alpha_vg > 0, "van_genuchten.alpha_vg: must be > 0");
  check(c.n_vg > 1, "van_genuchten.n_vg: must be > 1");
  check(c.reg.zeta >= 0, "regularization.zeta: must be >= 0");
  check(c.reg.eta >= 0, "regularization.eta: must be >= 0");
  check(c.solver.tol_abs > 0, "solver.tol_abs: must be > 0");
  check(c.solver.tol_rel >= 0, "solver.tol_rel: must be >= 0");
  check(c.solver.max_iters >= 1, "solver.max_iters: must be >= 1");
  check(c.solver.source_time_samples >= 1,
        "solver.source_time_samples: must be >= 1");
  if (c.monitors && c.steps > 0)
    check(c.t_end / c.steps < 0.125,
          "time: stability monitors require tau < 1/8");
  check(c.s_floor > 0 && c.s_floor < 1, "conditions.s_floor: must lie in (0,1)");
  check(c.declared_smin >= 0 && c.declared_smin < 1,
        "conditions.declared_smin: must lie in [0,1)");
  check(c.steps_per_cells > 0, "mms.steps_per_cells: must be > 0");
  check(!c.mms_levels.empty(), "mms.levels: must not be empty");
  for (int n : c.mms_levels)
    check(n >= 2, "mms.levels: each level needs at least 2 cells");
  check(c.mms_branch == "saturated" || c.mms_branch == "unsaturated",
        "mms.branch: must be 'saturated' or 'unsaturated'");
  check(c.sweep_parameter == "eta" || c.sweep_parameter == "zeta",
        "sweep.parameter: must be 'eta' or 'zeta'");
  check(c.ladder.size() >= 2, "sweep.ladder: need at least two rungs");
  for (double v : c.ladder) check(v > 0, "sweep.ladder: entries must be > 0");
  check(c.terzaghi_cells >= 2, "terzaghi.cells: must be >= 2");
  check(c.terzaghi_steps >= 1, "terzaghi.steps: must be >= 1");
  check(c.series_terms >= 1, "terzaghi.series_terms: must be >= 1");
  for (const std::string& tag : c.boundary) {
    if (tag.empty()) continue;
    const auto colon = tag.find(':');
    bool ok = colon != std::string::npos;
    if (ok) {
      const std::string mech = tag.substr(0, colon);
      const std::string flow = tag.substr(colon + 1);
      ok = (mech == "fixed" || mech == "roller" || mech == "neumann") &&
           (flow == "dirichlet" || flow == "neumann");
    }
    check(ok, "boundary: tags must be '<fixed|roller|neumann>:<dirichlet|neumann>'");
  }
}

}  // namespace

ParseResult parse_config_text(const std::string& text) {
  ParseResult result;
  RunConfig c;
  c.raw_text = text;
  std::vector<std::string> errors;
  Reader r(lex(text), errors);

  r.get_string("scenario", "name", c.scenario);
  r.get_double("scenario", "load", c.load);
  r.get_double("scenario", "chi_surface", c.chi_surface);
  r.get_double("scenario", "chi_dry", c.chi_dry);

  r.get_int("mesh", "nx", c.nx);
  r.get_int("mesh", "ny", c.ny);
  r.get_double("mesh", "lx", c.lx);
  r.get_double("mesh", "ly", c.ly);

  c.t_end_set = r.has("time", "t_end");
  r.get_double("time", "t_end", c.t_end);
  r.get_int("time", "steps", c.steps);

  for (const char* key : {"mu", "lambda", "alpha_biot", "c_w", "inv_n", "phi0",
                          "kappa_abs", "kappa_min", "kappa_max"})
    if (r.has("material", key)) c.material_set = true;
  c.load_set = r.has("scenario", "load");
  r.get_double("material", "mu", c.material.mu);
  r.get_double("material", "lambda", c.material.lambda);
  r.get_double("material", "alpha_biot", c.material.alpha_biot);
  r.get_double("material", "c_w", c.material.c_w);
  r.get_double("material", "inv_n", c.material.inv_n);
  r.get_double("material", "phi0", c.material.phi0);
  r.get_double("material", "kappa_abs", c.material.kappa_abs);
  r.get_double("material", "kappa_min", c.material.kappa_min);
  r.get_double("material", "kappa_max", c.material.kappa_max);

  r.get_double("van_genuchten", "alpha_vg", c.alpha_vg);
  r.get_double("van_genuchten", "n_vg", c.n_vg);

  r.get_double("regularization", "zeta", c.reg.zeta);
  r.get_double("regularization", "eta", c.reg.eta);

  r.get_double("solver", "tol_abs", c.solver.tol_abs);
  r.get_double("solver", "tol_rel", c.solver.tol_rel);
  r.get_int("solver", "max_iters", c.solver.max_iters);
  r.get_bool("solver", "retry_with_halved_tau", c.solver.retry_with_halved_tau);
  r.get_bool("solver", "use_law_table", c.solver.use_law_table);
  r.get_double("solver", "table_p_min", c.solver.table.p_w_min);
  r.get_int("solver", "table_segments", c.solver.table.segments);
  r.get_int("solver", "source_time_samples", c.solver.source_time_samples);
  r.get_bool("solver", "monitors", c.monitors);

  r.get_string("boundary", "left", c.boundary[0]);
  r.get_string("boundary", "right", c.boundary[1]);
  r.get_string("boundary", "bottom", c.boundary[2]);
  r.get_string("boundary", "top", c.boundary[3]);

  r.get_int("terzaghi", "cells", c.terzaghi_cells);
  r.get_int("terzaghi", "steps", c.terzaghi_steps);
  r.get_int("terzaghi", "series_terms", c.series_terms);

  r.get_int_list("mms", "levels", c.mms_levels);
  r.get_string("mms", "branch", c.mms_branch);
  r.get_double("mms", "steps_per_cells", c.steps_per_cells);

  r.get_string("sweep", "parameter", c.sweep_parameter);
  r.get_double_list("sweep", "ladder", c.ladder);

  r.get_double("conditions", "s_floor", c.s_floor);
  r.get_double("conditions", "declared_smin", c.declared_smin);

  r.get_string("output", "dir", c.output_dir);
  r.get_bool("output", "plot_data", c.plot_data);
  r.get_unsigned("output", "seed", c.seed);

  r.finish();
  validate(c, errors);

  result.errors = std::move(errors);
  if (result.errors.empty()) result.config = std::move(c);
  return result;
}

ParseResult parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    ParseResult r;
    r.errors.push_back("cannot open config file: " + path);
    return r;
  }
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace uporo
