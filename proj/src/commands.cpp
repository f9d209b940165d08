#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "liouville/ambient.hpp"
#include "liouville/cutlocus.hpp"
#include "liouville/geodesic.hpp"
#include "liouville/jacobi.hpp"
#include "liouville/mesh_io.hpp"
#include "liouville/suites.hpp"
#include "spec_io.hpp"

namespace liouville {

// ---------------------------------------------------------------------------
// Run header.

nlohmann::ordered_json RunHeader::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "liouville";
  j["version"] = version;
  j["command"] = command;
  j["spec_hash"] = spec_hash;
  j["seed"] = seed;
  j["tolerances"] = tolerances_json(tol);
  return j;
}

RunHeader RunHeader::from_json(const nlohmann::json& j) {
  RunHeader h;
  try {
    h.version = j.at("version").get<std::string>();
    h.command = j.at("command").get<std::string>();
    h.spec_hash = j.at("spec_hash").get<std::string>();
    h.seed = j.at("seed").get<std::uint64_t>();
    const auto& t = j.at("tolerances");
    h.tol.rtol = t.at("rtol");
    h.tol.atol = t.at("atol");
    h.tol.degeneracy = t.at("degeneracy");
    h.tol.energy_step = t.at("energy_step");
    h.tol.b_drift_abort = t.at("b_drift_abort");
    h.tol.time = t.at("time");
    h.tol.multiplicity = t.at("multiplicity");
    h.tol.branch_guard = t.at("branch_guard");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed run header: ") + e.what());
  }
  return h;
}

std::string RunHeader::line(const std::string& prefix) const {
  return prefix + "run " + to_json().dump() + "\n";
}

RunHeader RunHeader::parse(const std::string& text) {
  std::istringstream is(text);
  std::string l;
  while (std::getline(is, l)) {
    auto k = l.find("run {");
    if (k == std::string::npos) continue;
    try {
      return from_json(nlohmann::json::parse(l.substr(k + 4)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed run header: ") + e.what());
    }
  }
  // JSON documents carry the header under "run"
  try {
    auto j = nlohmann::json::parse(text);
    if (j.is_object() && j.contains("run")) return from_json(j.at("run"));
  } catch (const nlohmann::json::exception&) {
  }
  throw InputError("no run header found");
}

bool operator==(const RunHeader& a, const RunHeader& b) {
  return a.to_json() == b.to_json();
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw InputError(what + ": empty entry in '" + s + "'");
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !std::isfinite(x))
      throw InputError(what + ": not a number: '" + item + "'");
    v.push_back(x);
  }
  if (v.empty()) throw InputError(what + ": empty list");
  return v;
}

std::vector<double> sphere_from_angles(const std::vector<double>& th) {
  const int n = int(th.size()) + 1;
  std::vector<double> q(n);
  double s = 1.0;
  for (int k = 0; k < n - 1; ++k) {
    q[n - 1 - k] = s * std::cos(th[k]);
    s *= std::sin(th[k]);
  }
  q[0] = s;
  return q;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path);
  os << text;
}

bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

struct Common {
  std::string spec;
  std::string cache;
  std::uint64_t seed = 1;
  int workers = 1;
};

void add_common(CLI::App* c, Common& o, bool seeded) {
  c->add_option("--spec", o.spec, "manifold spec file (JSON)")->required();
  c->add_option("--cache", o.cache, "directory for the binary period-table sidecar");
  if (seeded) c->add_option("--seed", o.seed, "random seed")->capture_default_str();
  c->add_option("--workers", o.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

RunHeader header_for(const ManifoldSpec& s, const std::string& cmd, std::uint64_t seed) {
  RunHeader h;
  h.version = kVersion;
  h.command = cmd;
  h.spec_hash = s.hash_hex();
  h.seed = seed;
  h.tol = s.tol;
  return h;
}

BandPoint read_point(const LiouvilleManifold& M, const std::string& s) {
  std::vector<double> x = parse_list(s, "--point");
  if (int(x.size()) != M.n())
    throw InputError("--point needs " + std::to_string(M.n()) + " coordinates, got " +
                     std::to_string(x.size()));
  return make_point(M, x);
}

CovectorState read_covector(const LiouvilleManifold& M, const BandPoint& p, const std::string& eta,
                            const std::string& angles) {
  if (eta.empty() == angles.empty()) throw InputError("give exactly one of --eta and --angles");
  if (!eta.empty()) {
    std::vector<double> xi = parse_list(eta, "--eta");
    if (int(xi.size()) != M.n())
      throw InputError("--eta needs " + std::to_string(M.n()) + " components");
    return normalize_unit(M, CovectorState{p, xi});
  }
  std::vector<double> th = parse_list(angles, "--angles");
  if (int(th.size()) != M.n() - 1)
    throw InputError("--angles needs " + std::to_string(M.n() - 1) + " angles");
  return covector_at(M, p, sphere_from_angles(th));
}

// ---------------------------------------------------------------------------

struct PeriodsArgs {
  Common c;
  bool json = false;
};

int cmd_periods(const PeriodsArgs& a, std::ostream& out) {
  ManifoldSpec s = load_spec(a.c.spec);
  LiouvilleManifold M = make_manifold(s, a.c.cache);
  RunHeader h = header_for(s, "periods", a.c.seed);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 1; i <= M.n(); ++i) {
    const CoordinateFunction& f = M.f(i);
    double al = M.alpha(i), sym = 0;
    for (int k = 0; k <= 64; ++k) {
      double x = al * k / 64.0;
      sym = std::max({sym, std::abs(f(-x) - f(x)), std::abs(f(al / 2 - x) - f(x))});
    }
    rows.push_back({{"i", i},
                    {"alpha", al},
                    {"f_at_0_minus_a_i", f(0.0) - M.a(i)},
                    {"f_at_quarter_minus_a_i_minus_1", f(al / 4) - M.a(i - 1)},
                    {"symmetry_residual", sym}});
  }
  if (a.json) {
    nlohmann::ordered_json j;
    j["run"] = h.to_json();
    j["n"] = M.n();
    j["a"] = M.spectrum().values();
    j["A"] = M.A().kind_name();
    j["periods"] = rows;
    out << j.dump(1) << "\n";
    return kExitOk;
  }
  std::ostringstream os;
  os << h.line("# ");
  os << "i  alpha                    f_i(0)-a_i   f_i(alpha/4)-a_(i-1)  symmetry\n";
  for (const auto& r : rows) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-2d %-24.17g %-12.3e %-21.3e %.3e\n", r["i"].get<int>(),
                  r["alpha"].get<double>(), r["f_at_0_minus_a_i"].get<double>(),
                  r["f_at_quarter_minus_a_i_minus_1"].get<double>(),
                  r["symmetry_residual"].get<double>());
    os << buf;
  }
  out << os.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  Common c;
  std::string suite = "all";
  int draws = 100;
  std::string summary;
  bool json = false;
};

nlohmann::ordered_json report_json(const SuiteReport& r) {
  nlohmann::ordered_json j;
  j["suite"] = r.suite;
  j["n"] = r.n;
  j["draws"] = r.draws;
  j["seed"] = r.seed;
  j["premise_failed"] = r.premise_failed;
  j["warning"] = r.warning;
  j["pass"] = r.pass();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& w : r.rows)
    rows.push_back({{"name", w.name},
                    {"draws", w.draws},
                    {"failures", w.failures},
                    {"worst", w.worst},
                    {"limit", w.limit},
                    {"status", w.status}});
  j["rows"] = rows;
  return j;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  ManifoldSpec s = load_spec(a.c.spec);
  if (a.draws < 1) throw InputError("--draws must be positive");
  RunHeader h = header_for(s, "verify", a.c.seed);
  std::vector<SuiteReport> reps;
  if (a.suite == "identities" || a.suite == "all")
    reps.push_back(identity_suite(s.a, a.draws, a.c.seed, a.c.workers));
  if (a.suite == "inequalities" || a.suite == "all") {
    if (s.a.n() < 3)
      err << "warning: inequality suite needs n >= 3 (no subset sizes for n = 2); skipped\n";
    else
      reps.push_back(inequality_suite(s.A, s.a, a.draws, a.c.seed, a.c.workers));
  }
  nlohmann::ordered_json j;
  j["run"] = h.to_json();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  bool pass = true;
  for (const auto& r : reps) {
    arr.push_back(report_json(r));
    pass = pass && r.pass();
    if (!r.warning.empty()) err << "warning: " << r.suite << ": " << r.warning << "\n";
  }
  j["suites"] = arr;
  j["pass"] = pass;
  if (!a.summary.empty()) emit(a.summary, j.dump(1) + "\n", out);
  if (a.json) {
    out << j.dump(1) << "\n";
  } else {
    std::ostringstream os;
    os << h.line("# ");
    for (const auto& r : reps) {
      os << "suite " << r.suite << "  n=" << r.n << "  draws=" << r.draws << "  seed=" << r.seed
         << "\n";
      for (const auto& w : r.rows) {
        char buf[300];
        std::snprintf(buf, sizeof buf, "  %-15s %4d/%-4d worst=%-13.6g limit=%-8.3g %s\n",
                      w.status.c_str(), w.failures, w.draws, w.worst, w.limit, w.name.c_str());
        os << buf;
      }
    }
    bool premise = false;
    for (const auto& r : reps) premise = premise || r.premise_failed;
    os << (pass ? "PASS" : "FAIL") << (premise ? " (premise failed: rows logged, not asserted)" : "")
       << "\n";
    out << os.str();
  }
  return pass ? kExitOk : kExitContract;
}

// ---------------------------------------------------------------------------

struct GeodesicArgs {
  Common c;
  std::string point, eta, angles, out, events;
  double T = 10, dt = 0.01;
};

std::string turn_label(const LiouvilleManifold& M, const FirstIntegralVector& b, double f) {
  const double tol = 1e3 * M.deg_tol();
  for (int k = 0; k <= M.n(); ++k)
    if (std::abs(f - M.a(k)) <= tol) return "a" + std::to_string(k);
  for (int l = 1; l <= M.n() - 1; ++l)
    if (std::abs(f - b.bl(l)) <= tol) return "b" + std::to_string(l);
  return "-";
}

int cmd_geodesic(const GeodesicArgs& a, std::ostream& out) {
  ManifoldSpec s = load_spec(a.c.spec);
  LiouvilleManifold M = make_manifold(s, a.c.cache);
  const int n = M.n();
  if (!(a.T >= 0)) throw InputError("--T must be >= 0");
  if (!(a.dt > 0)) throw InputError("--dt must be > 0");
  BandPoint p = read_point(M, a.point);
  CovectorState eta = read_covector(M, p, a.eta, a.angles);
  RunHeader h = header_for(s, "geodesic", a.c.seed);
  GeodesicTrace tr;
  if (a.T > 0) tr = integrate_geodesic(M, eta, a.T, TraceOptions::from(M.tol()));
  std::vector<double> times;
  for (long k = 0;; ++k) {
    double t = k * a.dt;
    if (t > a.T * (1 + 1e-14)) break;
    times.push_back(std::min(t, a.T));
  }
  if (times.back() < a.T) times.push_back(a.T);
  std::ostringstream os;
  os << h.line("# ");
  os << "t";
  for (const char* c : {"x", "xi", "lambda", "sigma"})
    for (int i = 1; i <= n; ++i) os << ',' << c << i;
  for (int l = 1; l <= n - 1; ++l) os << ",b" << l;
  os << "\n";
  for (double t : times) {
    std::vector<double> z = a.T > 0 ? tr.state(t) : eta.z();
    std::vector<double> x(z.begin(), z.begin() + n), xi(z.begin() + n, z.begin() + 2 * n);
    BandPoint q = make_point(M, x);
    os << num(t);
    for (double v : x) os << ',' << num(v);
    for (double v : xi) os << ',' << num(v);
    for (double v : q.lambda) os << ',' << num(v);
    for (int i = 1; i <= n; ++i) os << ',' << num(a.T > 0 ? tr.sigma(i, t) : 0.0);
    std::vector<double> b(n - 1, NAN);
    try {
      b = b_from_state(M, q, xi).b;
    } catch (const std::exception&) {
    }
    for (double v : b) os << ',' << num(v);
    os << "\n";
  }
  emit(a.out, os.str(), out);
  if (!a.events.empty()) {
    struct Ev {
      double t;
      std::string text;
    };
    std::vector<Ev> ev;
    FirstIntegralVector b0 = b_from_covector(M, eta);
    if (a.T > 0) {
      for (int i = 1; i <= n; ++i)
        for (const auto& tp : tr.turns[i - 1])
          ev.push_back({tp.t, "event=turn index=" + std::to_string(i) + " f=" + num(tp.f) +
                                  " sigma=" + num(tp.sigma) + " at=" + turn_label(M, b0, tp.f)});
      ev.push_back({a.T, "event=end max_b_drift=" + num(tr.max_b_drift) +
                             " max_energy_step=" + num(tr.max_energy_step)});
    }
    try {
      CutTimeResult c = cut_time(M, eta, CutTimeOptions{TraceOptions::from(M.tol())});
      if (c.t0 <= a.T)
        ev.push_back({c.t0, std::string("event=cut case=") + cut_case_name(c.tag) +
                                " sigma_n_target=" + num(c.target) +
                                (c.warning.empty() ? "" : " warning=\"" + c.warning + "\"")});
    } catch (const std::exception& e) {
      ev.push_back({0.0, std::string("event=cut_unavailable reason=\"") + e.what() + "\""});
    }
    std::stable_sort(ev.begin(), ev.end(), [](const Ev& x, const Ev& y) { return x.t < y.t; });
    std::ostringstream es;
    es << h.line("# ");
    for (const auto& e : ev) es << "t=" << num(e.t) << ' ' << e.text << "\n";
    emit(a.events, es.str(), out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ConjugateArgs {
  Common c;
  std::string point, eta, angles, out;
  double T = 10;
};

int cmd_conjugate(const ConjugateArgs& a, std::ostream& out) {
  ManifoldSpec s = load_spec(a.c.spec);
  LiouvilleManifold M = make_manifold(s, a.c.cache);
  if (!(a.T > 0)) throw InputError("--T must be > 0");
  BandPoint p = read_point(M, a.point);
  CovectorState eta = read_covector(M, p, a.eta, a.angles);
  ConjugateOptions o;
  o.mult_tol = M.tol().multiplicity;
  o.time_tol = M.tol().time;
  ConjugateScan scan = conjugate_points(M, eta, a.T, o);
  std::ostringstream os;
  os << header_for(s, "conjugate", a.c.seed).line("# ");
  os << "t,multiplicity,family,flags\n";
  for (const auto& e : scan.events) {
    std::string flags;
    if (e.cluster) flags += "cluster";
    if (e.s_aligned) flags += std::string(flags.empty() ? "" : "|") + "s_aligned";
    if (flags.empty()) flags = "-";
    os << num(e.t) << ',' << e.multiplicity << ',' << e.family << ',' << flags << "\n";
  }
  emit(a.out, os.str(), out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CutLocusArgs {
  Common c;
  std::string point, res = "16x16", audit, out;
  int min_points = 5, shoot = 2000;
};

std::pair<int, int> parse_res(const std::string& s) {
  auto k = s.find_first_of("xX");
  try {
    std::size_t u1 = 0, u2 = 0;
    int r = std::stoi(s.substr(0, k), &u1);
    int q = k == std::string::npos ? r : std::stoi(s.substr(k + 1), &u2);
    if (u1 != (k == std::string::npos ? s.size() : k) ||
        (k != std::string::npos && u2 != s.size() - k - 1) || r < 1 || q < 3)
      throw InputError("");
    return {r, q};
  } catch (const std::exception&) {
    throw InputError("--res must look like RxA with R >= 1, A >= 3, got '" + s + "'");
  }
}

int cmd_cutlocus(const CutLocusArgs& a, std::ostream& out, std::ostream& err) {
  ManifoldSpec s = load_spec(a.c.spec);
  LiouvilleManifold M = make_manifold(s, a.c.cache);
  const int n = M.n();
  auto [R, Q] = parse_res(a.res);
  std::vector<std::string> audits;
  {
    std::stringstream ss(a.audit);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) {
        if (item != "minimality" && item != "conjugacy" && item != "pairs" &&
            item != "structure" && item != "antipodal")
          throw InputError("unknown audit '" + item +
                           "' (known: minimality, conjugacy, pairs, structure, antipodal)");
        audits.push_back(item);
      }
  }
  auto wants = [&](const char* k) { return std::find(audits.begin(), audits.end(), k) != audits.end(); };
  BandPoint p0 = read_point(M, a.point);
  CutLocusOptions opt;
  opt.cut.trace = TraceOptions::from(M.tol());
  opt.workers = a.c.workers;
  CutLocusMesh mesh;
  if (classify_point(M, p0).J(n - 1)) {
    DegenerateOptions d;
    d.base = opt;
    mesh = build_cut_locus_degenerate(M, embed_point(M, p0), R, d);
  } else {
    mesh = build_cut_locus(M, p0, R, Q, opt);
  }
  RunHeader h = header_for(s, "cut-locus", a.c.seed);
  std::ostream& rep = a.out.empty() || a.out == "-" ? err : out;
  if (ends_with(a.out, ".ply")) {
    std::string warn;
    std::string ply = mesh_ply_text(mesh, &warn);
    auto k = ply.find("\n", ply.find("format ascii")) + 1;
    ply.insert(k, h.line("comment "));
    if (!warn.empty()) err << "warning: " << warn << "\n";
    emit(a.out, ply, out);
  } else {
    nlohmann::ordered_json j;
    j["run"] = h.to_json();
    nlohmann::ordered_json body = mesh_to_json(mesh);
    for (auto& [k, v] : body.items()) j[k] = v;
    emit(a.out, j.dump(1) + "\n", out);
  }
  bool pass = true;
  rep << "mesh vertices=" << mesh.vertices.size() << " holes=" << mesh.holes()
      << " cells=" << mesh.cells.size() << (mesh.degenerate ? " base=J" : "") << "\n";
  for (const auto& v : mesh.vertices)
    if (!v.ok) rep << "hole ring=" << v.ring << " slot=" << v.slot << " error=\"" << v.error << "\"\n";
  if (wants("pairs")) {
    PairReport r = pair_coincidence_audit(mesh);
    bool ok = r.max_gap < 1e-5 && r.max_dt < 1e-8;
    pass = pass && ok;
    rep << "audit pairs " << (ok ? "PASS" : "FAIL") << " pairs=" << r.pairs
        << " max_gap=" << short_num(r.max_gap) << " max_dt=" << short_num(r.max_dt) << "\n";
  }
  if (wants("structure")) {
    StructureReport r = mesh_structure(mesh);
    bool ok = r.holes == 0 && r.injectivity_violations == 0 && r.boundary_simple && r.connected &&
              r.max_lambda_dev < 1e-7 * M.spectrum().width();
    pass = pass && ok;
    rep << "audit structure " << (ok ? "PASS" : "FAIL") << " max_lambda_dev="
        << short_num(r.max_lambda_dev) << " injectivity_violations=" << r.injectivity_violations
        << " boundary_simple=" << r.boundary_simple << " components=" << r.components << "\n";
  }
  if (wants("antipodal")) {
    AntipodalReport r = antipodal_audit(mesh);
    if (!r.applicable) {
      rep << "audit antipodal SKIPPED (needs A = sqrt and a hole-free mesh)\n";
    } else {
      pass = pass && r.pass;
      rep << "audit antipodal " << (r.pass ? "PASS" : "FAIL") << " distance=" << short_num(r.distance)
          << " boundary_distance=" << short_num(r.boundary_distance)
          << " margin=" << short_num(r.margin) << "\n";
    }
  }
  if (wants("conjugacy")) {
    if (mesh.degenerate) {
      int bad = 0;
      for (const auto& v : mesh.vertices)
        if (v.ok && v.boundary && v.conj_mult != 2) ++bad;
      pass = pass && bad == 0;
      rep << "audit conjugacy " << (bad == 0 ? "PASS" : "FAIL")
          << " boundary multiplicity 2 expected, mismatches=" << bad << "\n";
    } else {
      ConjugacyAuditOptions o;
      o.workers = a.c.workers;
      ConjugacyAudit r = boundary_conjugacy_audit(M, mesh, o);
      pass = pass && r.pass;
      rep << "audit conjugacy " << (r.pass ? "PASS" : "FAIL") << " checked=" << r.checked
          << " failed=" << r.failed << " skipped=" << r.skipped
          << " boundary_max_dt=" << short_num(r.max_dt)
          << " interior_min_ratio=" << short_num(r.min_interior_ratio) << "\n";
    }
  }
  if (wants("minimality")) {
    if (mesh.degenerate) {
      rep << "audit minimality SKIPPED (base point in J)\n";
    } else {
      std::vector<int> interior;
      for (int i = 0; i < int(mesh.vertices.size()); ++i)
        if (mesh.vertices[i].ok && !mesh.vertices[i].boundary) interior.push_back(i);
      const int K = std::min<int>(a.min_points, int(interior.size()));
      BandPoint base = make_point(M, mesh.p0_x);
      MinimalityOptions mo;
      mo.resolution = a.shoot;
      mo.workers = a.c.workers;
      mo.seed = a.c.seed;
      for (int k = 0; k < K; ++k) {
        const CutVertex& v = mesh.vertices[interior[(std::size_t(k) * interior.size()) / K]];
        MinimalityReport r = minimality_audit(M, base, v.u, v.t0, mo);
        if (r.verdict == Verdict::Fail) pass = false;
        rep << "audit minimality " << verdict_name(r.verdict) << " ring=" << v.ring
            << " slot=" << v.slot << " t0=" << short_num(v.t0)
            << " min_arrival=" << short_num(r.min_arrival) << " rays_hit=" << r.rays_hit << "\n";
      }
    }
  }
  return pass ? kExitOk : kExitContract;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geodesics, conjugate points and cut loci on Liouville manifolds", "liouville"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  PeriodsArgs pa;
  auto* sp = app.add_subcommand("periods", "periods alpha_i and coordinate-function checks");
  add_common(sp, pa.c, false);
  sp->add_flag("--json", pa.json, "machine-readable output");

  VerifyArgs va;
  auto* sv = app.add_subcommand("verify", "period-integral identity and inequality suites");
  add_common(sv, va.c, true);
  sv->add_option("--suite", va.suite)->check(CLI::IsMember({"identities", "inequalities", "all"}))
      ->capture_default_str();
  sv->add_option("--draws", va.draws)->capture_default_str();
  sv->add_option("--summary", va.summary, "write the JSON summary to this file");
  sv->add_flag("--json", va.json, "print the JSON summary instead of the table");

  GeodesicArgs ga;
  auto* sg = app.add_subcommand("geodesic", "integrate a unit-speed geodesic, write a CSV trace");
  add_common(sg, ga.c, true);
  sg->add_option("--point", ga.point, "base point x_1,...,x_n")->required();
  sg->add_option("--eta", ga.eta, "covector components xi_1,...,xi_n (normalized)");
  sg->add_option("--angles", ga.angles, "unit covector as n-1 angles from the xi_n pole");
  sg->add_option("--T", ga.T, "length")->capture_default_str();
  sg->add_option("--dt", ga.dt, "output spacing")->capture_default_str();
  sg->add_option("--out", ga.out, "CSV path (default stdout)");
  sg->add_option("--events", ga.events, "event log path");

  ConjugateArgs ca;
  auto* sc = app.add_subcommand("conjugate", "conjugate points along a geodesic");
  add_common(sc, ca.c, true);
  sc->add_option("--point", ca.point)->required();
  sc->add_option("--eta", ca.eta);
  sc->add_option("--angles", ca.angles);
  sc->add_option("--T", ca.T)->capture_default_str();
  sc->add_option("--out", ca.out);

  CutLocusArgs la;
  auto* sl = app.add_subcommand("cut-locus", "cut locus mesh of a base point");
  add_common(sl, la.c, true);
  sl->add_option("--point", la.point, "base point x_1,...,x_n")->required();
  sl->add_option("--res", la.res, "hemisphere resolution RxA")->capture_default_str();
  sl->add_option("--audit", la.audit, "comma list: minimality,conjugacy,pairs,structure,antipodal");
  sl->add_option("--out", la.out, "mesh.json or mesh.ply (default: JSON on stdout)");
  sl->add_option("--minimality-points", la.min_points)->capture_default_str();
  sl->add_option("--shoot", la.shoot, "shooting directions per minimality check")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }
  try {
    if (*sp) return cmd_periods(pa, out);
    if (*sv) return cmd_verify(va, out, err);
    if (*sg) return cmd_geodesic(ga, out);
    if (*sc) return cmd_conjugate(ca, out);
    if (*sl) return cmd_cutlocus(la, out, err);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ContractViolation& e) {
    err << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitContract;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, out, err);
}

}  // namespace liouville
