#include "bmf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bmf {

using nlohmann::json;

namespace {

std::string join(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

// Object view that tracks its JSON pointer and rejects unknown keys.
class Section {
 public:
  Section(const json& j, std::string ptr, std::set<std::string> allowed) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) throw ConfigError(ptr_.empty() ? "/" : ptr_, "expected an object");
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) throw ConfigError(join(ptr_, k), "unknown key");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  const json& raw(const std::string& k) const {
    if (!has(k)) throw ConfigError(join(ptr_, k), "missing required key");
    return j_.at(k);
  }
  std::string path(const std::string& k) const { return join(ptr_, k); }

  double number(const std::string& k) const {
    const auto& v = raw(k);
    if (!v.is_number()) throw ConfigError(path(k), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path(k), "must be finite");
    return d;
  }
  double number(const std::string& k, double dflt) const { return has(k) ? number(k) : dflt; }

  std::uint64_t integer(const std::string& k) const {
    const auto& v = raw(k);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(path(k), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t integer(const std::string& k, std::uint64_t dflt) const { return has(k) ? integer(k) : dflt; }

  bool boolean(const std::string& k, bool dflt) const {
    if (!has(k)) return dflt;
    const auto& v = raw(k);
    if (!v.is_boolean()) throw ConfigError(path(k), "expected a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& k) const {
    const auto& v = raw(k);
    if (!v.is_string()) throw ConfigError(path(k), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& k, const std::string& dflt) const { return has(k) ? string(k) : dflt; }

  std::vector<std::size_t> integer_list(const std::string& k) const {
    const auto& v = raw(k);
    if (!v.is_array() || v.empty()) throw ConfigError(path(k), "expected a non-empty array");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_unsigned()) throw ConfigError(path(k) + "/" + std::to_string(i), "expected a non-negative integer");
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string ptr_;
};

void require(bool ok, const std::string& ptr, const std::string& msg) {
  if (!ok) throw ConfigError(ptr, msg);
}

WaveFunction packet(const GridSpec& g, const Section& s) {
  const double width = s.number("width");
  require(width > 0.0, s.path("width"), "must be positive");
  auto u = gaussian_packet(g, s.number("center", 0.0), width, s.number("momentum", 0.0));
  return u;
}

std::vector<double> matrix_rows(const json& v, const std::string& ptr, std::size_t m) {
  require(v.is_array() && v.size() == m, ptr, "expected " + std::to_string(m) + " rows");
  std::vector<double> out;
  for (std::size_t i = 0; i < m; ++i) {
    require(v[i].is_array() && v[i].size() == m, ptr + "/" + std::to_string(i), "expected " + std::to_string(m) + " entries");
    for (std::size_t j = 0; j < m; ++j) {
      require(v[i][j].is_number(), ptr + "/" + std::to_string(i) + "/" + std::to_string(j), "expected a number");
      out.push_back(v[i][j].get<double>());
    }
  }
  return out;
}

CouplingOperator parse_L(const GridSpec& g, const json& j, const std::string& ptr) {
  require(j.is_object(), ptr, "expected an object");
  require(j.contains("kind") && j.at("kind").is_string(), ptr + "/kind", "missing required key");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "zero") {
    Section s(j, ptr, {"kind"});
    return CouplingOperator::zero(g);
  }
  if (kind == "scalar") {
    Section s(j, ptr, {"kind", "lambda", "lambda_imag"});
    return CouplingOperator::scalar(g, cplx(s.number("lambda"), s.number("lambda_imag", 0.0)));
  }
  if (kind == "multiplication") {
    Section s(j, ptr, {"kind", "symbol", "amplitude", "mode"});
    const auto sym = s.string("symbol");
    require(sym == "cos", s.path("symbol"), "supported symbols: cos");
    const double A = s.number("amplitude");
    const auto mode = s.integer("mode", 1);
    require(mode >= 1 && mode < g.n / 2, s.path("mode"), "must be in [1, n/2)");
    return CouplingOperator::cosine(g, A, static_cast<int>(mode));
  }
  if (kind == "finite_rank") {
    Section s(j, ptr, {"kind", "terms"});
    const auto& terms = s.raw("terms");
    require(terms.is_array() && !terms.empty(), s.path("terms"), "expected a non-empty array");
    std::vector<FiniteRankTerm> out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string tp = s.path("terms") + "/" + std::to_string(i);
      Section t(terms[i], tp, {"lambda", "lambda_imag", "f", "g"});
      FiniteRankTerm term;
      term.lambda = cplx(t.number("lambda"), t.number("lambda_imag", 0.0));
      term.f = packet(g, Section(t.raw("f"), t.path("f"), {"center", "width", "momentum"})).values;
      term.g = packet(g, Section(t.raw("g"), t.path("g"), {"center", "width", "momentum"})).values;
      out.push_back(std::move(term));
    }
    return CouplingOperator::finite_rank(g, std::move(out));
  }
  if (kind == "dense") {
    Section s(j, ptr, {"kind", "real", "imag"});
    const std::size_t m = g.size();
    require(m <= CouplingOperator::max_dense_size, ptr, "dense coupling needs at most 64 grid points");
    const auto re = matrix_rows(s.raw("real"), s.path("real"), m);
    const auto im = s.has("imag") ? matrix_rows(s.raw("imag"), s.path("imag"), m) : std::vector<double>(m * m, 0.0);
    Matrix a(m, m);
    for (std::size_t i = 0; i < m * m; ++i) a.data()[i] = cplx(re[i], im[i]);
    return CouplingOperator::dense(g, std::move(a));
  }
  throw ConfigError(ptr + "/kind", "unknown coupling kind '" + kind + "'");
}

PotentialSpec parse_V(const GridSpec& g, const json& j, const std::string& ptr) {
  require(j.is_object(), ptr, "expected an object");
  require(j.contains("kind") && j.at("kind").is_string(), ptr + "/kind", "missing required key");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "zero") {
    Section s(j, ptr, {"kind"});
    return PotentialSpec::zero(g);
  }
  if (kind == "gaussian") {
    Section s(j, ptr, {"kind", "V0", "sigma"});
    const double sigma = s.number("sigma");
    require(sigma > 0.0, s.path("sigma"), "must be positive");
    return PotentialSpec::gaussian(g, s.number("V0"), sigma);
  }
  if (kind == "cosine") {
    Section s(j, ptr, {"kind", "V0", "mode"});
    const auto mode = s.integer("mode", 1);
    require(mode >= 1 && mode < g.n / 2, s.path("mode"), "must be in [1, n/2)");
    return PotentialSpec::cosine(g, s.number("V0"), static_cast<int>(mode));
  }
  throw ConfigError(ptr + "/kind", "unknown potential kind '" + kind + "'");
}

}  // namespace

RunConfig parse_config(const json& doc, bool physics_optional) {
  RunConfig c;
  c.document = doc;
  Section root(doc, "", {"grid", "time", "physics", "initial", "meanfield", "nbody", "mc", "output", "delta", "proptest"});

  c.has_physics = root.has("grid") || root.has("time") || root.has("physics") || !physics_optional;
  if (c.has_physics) {
    Section g(root.raw("grid"), "/grid", {"dim", "n", "box_length"});
    const auto dim = g.integer("dim", 1);
    require(dim >= 1 && dim <= 3, g.path("dim"), "must be 1, 2 or 3");
    const auto n = g.integer("n");
    require(n >= 4 && (n & (n - 1)) == 0, g.path("n"), "must be a power of two >= 4");
    const double box = g.number("box_length");
    require(box > 0.0, g.path("box_length"), "must be positive");
    try {
      c.grid = GridSpec(static_cast<int>(dim), n, box);
    } catch (const std::exception& e) {
      throw ConfigError("/grid", e.what());
    }

    Section t(root.raw("time"), "/time", {"T", "dt"});
    c.T = t.number("T");
    c.dt = t.number("dt");
    require(c.T > 0.0, t.path("T"), "must be positive");
    require(c.dt > 0.0 && c.dt <= 0.1, t.path("dt"), "must be in (0, 0.1]");
    const double k = c.T / c.dt;
    require(std::abs(k - std::round(k)) <= 1e-9 * k, t.path("T"), "must be a whole multiple of dt");

    Section p(root.raw("physics"), "/physics", {"L", "V", "H"});
    require(p.string("H", "laplacian") == "laplacian", p.path("H"), "only \"laplacian\" is supported");
    c.phys.L = parse_L(c.grid, p.raw("L"), p.path("L"));
    c.phys.V = parse_V(c.grid, p.raw("V"), p.path("V"));
    require(c.dt * c.phys.L.norm_bound() * c.phys.L.norm_bound() <= 0.5, t.path("dt"),
            "dt * ||L||^2 must not exceed 0.5");

    if (root.has("initial")) {
      Section s(root.raw("initial"), "/initial", {"center", "width", "momentum"});
      c.initial.center = s.number("center", 0.0);
      c.initial.width = s.number("width", 1.0);
      c.initial.momentum = s.number("momentum", 0.0);
      require(c.initial.width > 0.0, s.path("width"), "must be positive");
    }
  }

  if (root.has("meanfield")) {
    Section s(root.raw("meanfield"), "/meanfield", {"mode", "M", "picard_tol", "max_iters", "renormalize"});
    const auto mode = s.string("mode", "picard");
    require(mode == "picard" || mode == "ensemble", s.path("mode"), "must be \"picard\" or \"ensemble\"");
    c.mode = mode == "picard" ? MeanFieldMode::picard : MeanFieldMode::ensemble;
    c.M = s.integer("M", c.M);
    require(c.M >= 1, s.path("M"), "must be >= 1");
    c.picard_tol = s.number("picard_tol", c.picard_tol);
    require(c.picard_tol > 0.0, s.path("picard_tol"), "must be positive");
    const auto it = s.integer("max_iters", static_cast<std::uint64_t>(c.max_iters));
    require(it >= 1 && it <= 1000, s.path("max_iters"), "must be in [1, 1000]");
    c.max_iters = static_cast<int>(it);
    c.renormalize = s.boolean("renormalize", true);
  }
  if (root.has("nbody")) {
    Section s(root.raw("nbody"), "/nbody", {"N_list", "memory_budget_mb", "pair_indicators"});
    if (s.has("N_list")) c.N_list = s.integer_list("N_list");
    for (std::size_t i = 0; i < c.N_list.size(); ++i)
      require(c.N_list[i] >= 1 && c.N_list[i] <= 16, s.path("N_list") + "/" + std::to_string(i), "must be in [1, 16]");
    c.memory_budget_mb = s.integer("memory_budget_mb", c.memory_budget_mb);
    require(c.memory_budget_mb >= 1, s.path("memory_budget_mb"), "must be >= 1");
    c.pair_indicators = s.boolean("pair_indicators", false);
  }
  if (root.has("mc")) {
    Section s(root.raw("mc"), "/mc", {"repetitions", "master_seed"});
    c.repetitions = s.integer("repetitions", c.repetitions);
    require(c.repetitions >= 1, s.path("repetitions"), "must be >= 1");
    c.master_seed = s.integer("master_seed", c.master_seed);
  }
  if (root.has("output")) {
    Section s(root.raw("output"), "/output", {"directory", "sample_stride"});
    c.directory = s.string("directory", "");
    c.sample_stride = s.integer("sample_stride", c.sample_stride);
    require(c.sample_stride >= 1, s.path("sample_stride"), "must be >= 1");
  }
  if (root.has("delta")) {
    Section s(root.raw("delta"), "/delta", {"N_list", "h1_power"});
    if (s.has("N_list")) c.delta_N_list = s.integer_list("N_list");
    for (std::size_t i = 0; i < c.delta_N_list.size(); ++i)
      require(c.delta_N_list[i] >= 2 && c.delta_N_list[i] <= 4096, s.path("N_list") + "/" + std::to_string(i),
              "must be in [2, 4096]");
    const auto p = s.integer("h1_power", 4);
    require(p >= 4 && p % 2 == 0 && p <= 16, s.path("h1_power"), "must be an even integer in [4, 16]");
    c.h1_power = static_cast<int>(p);
  }
  if (root.has("proptest")) {
    Section s(root.raw("proptest"), "/proptest",
              {"prodproj_samples", "hs_samples", "kolokoltsov_samples", "p3_samples", "nonlinearity_samples", "sde_samples"});
    auto& p = c.proptest;
    p.prodproj_samples = s.integer("prodproj_samples", p.prodproj_samples);
    p.hs_samples = s.integer("hs_samples", p.hs_samples);
    p.kolokoltsov_samples = s.integer("kolokoltsov_samples", p.kolokoltsov_samples);
    p.p3_samples = s.integer("p3_samples", p.p3_samples);
    p.nonlinearity_samples = s.integer("nonlinearity_samples", p.nonlinearity_samples);
    p.sde_samples = s.integer("sde_samples", p.sde_samples);
    for (auto k : {"prodproj_samples", "hs_samples", "kolokoltsov_samples", "p3_samples", "nonlinearity_samples", "sde_samples"})
      if (s.has(k)) require(s.integer(k) < (std::uint64_t{1} << 24), s.path(k), "must be below 2^24");
  }
  c.proptest.seed = c.master_seed;
  return c;
}

RunConfig load_config(const std::string& path, bool physics_optional) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc, physics_optional);
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
  json doc = cfg.document;
  doc["mc"]["master_seed"] = seed;
  cfg = parse_config(doc, !cfg.has_physics);
}

WaveFunction RunConfig::initial_state() const {
  return gaussian_packet(grid, initial.center, initial.width, initial.momentum);
}

ExperimentSetup RunConfig::setup() const {
  if (!has_physics) throw ConfigError("/physics", "missing required key");
  ExperimentSetup s;
  s.grid = grid;
  s.phys = phys;
  s.phi0 = initial_state();
  s.scheme.dt = dt;
  s.scheme.renormalize = renormalize;
  s.T = T;
  s.seed = master_seed;
  s.sample_stride = sample_stride;
  s.mode = mode;
  s.M = M;
  s.picard_tol = picard_tol;
  s.max_iters = max_iters;
  return s;
}

}  // namespace bmf
