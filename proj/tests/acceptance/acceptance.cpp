// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//   acceptance [--workers N] [--only 1,5,8]

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "common.hpp"
#include "liouville/cutlocus.hpp"
#include "liouville/jacobi.hpp"
#include "liouville/mesh_io.hpp"
#include "liouville/sigma.hpp"
#include "liouville/suites.hpp"
#include "oracles/oracles.hpp"

using namespace liouville;
using namespace testing_support;

namespace {

int g_workers = 8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}
std::string e3(double v) { return fmt("%.3e", v); }

const LiouvilleManifold& ell4() {
  static LiouvilleManifold M(AxisSpectrum({5, 4, 3, 2, 1}), GeneratorFunction::sqrt());
  return M;
}

BandPoint base2() {
  const LiouvilleManifold& M = ell2();
  return make_point(M, {0.3 * M.alpha(1) / 4, 0.6 * M.alpha(2) / 4});
}
BandPoint base3() {
  const LiouvilleManifold& M = ell3();
  return make_point(M, {0.3 * M.alpha(1) / 4, 0.55 * M.alpha(2) / 4, 0.4 * M.alpha(3) / 4});
}

const CutLocusMesh& arc2() {
  static CutLocusMesh m = [] {
    CutLocusOptions o;
    o.workers = g_workers;
    return build_cut_locus(ell2(), base2(), 64, 0, o);
  }();
  return m;
}

// 1. flat identity, n = 2, 3, 4
Outcome identities() {
  Outcome r{true, ""};
  double worst = 0;
  for (const LiouvilleManifold* M : {&ell2(), &ell3(), &ell4()}) {
    SuiteReport s = identity_suite(M->spectrum(), 1000, 101, g_workers);
    r.pass = r.pass && s.pass();
    worst = std::max(worst, s.rows[0].worst);
  }
  r.detail = "max relative residual " + e3(worst) + " (< 1e-8), 3x1000 draws";
  return r;
}

// 2. negativity and derivative positivity, n = 3
Outcome inequalities() {
  SuiteReport s = inequality_suite(GeneratorFunction::sqrt(), ell3().spectrum(), 100, 102, g_workers);
  double neg = -INFINITY, der = INFINITY, fd = 0;
  for (const auto& w : s.rows) {
    if (w.name.rfind("negativity", 0) == 0) neg = std::max(neg, w.worst);
    if (w.name.find("(min value)") != std::string::npos) der = std::min(der, w.worst);
    if (w.name.find("finite difference") != std::string::npos) fd = std::max(fd, w.worst);
  }
  Outcome r;
  r.pass = s.pass() && !s.premise_failed;
  r.detail = "max scaled sum " + e3(neg) + " (< 0), min derivative " + e3(der) +
             " (> 0), max FD mismatch " + e3(fd) + " (< 1e-4), " + std::to_string(s.rows.size()) +
             " rows";
  return r;
}

// 3. torus flow vs ambient RK4, n = 2
Outcome integrator() {
  const LiouvilleManifold& M = ell2();
  TraceOptions to;
  to.rtol = 1e-12;
  to.atol = 1e-14;
  oracle::AmbientRK4 rk{M.spectrum().values(), 2e-3};
  std::mt19937_64 rng(103);
  std::vector<CovectorState> eta;
  for (int k = 0; k < 100; ++k) eta.push_back(random_covector(M, interior_point(M, rng), rng));
  std::vector<double> gap(100), drift(100);
  parallel_for(100, g_workers, [&](int k) {
    GeodesicTrace tr = integrate_geodesic(M, eta[k], 10, to);
    std::vector<double> u, v;
    ambient_from_covector(M, eta[k], u, v);
    gap[k] = distance(position(M, tr, 10), rk.run(u, v, 10));
    drift[k] = tr.max_b_drift;
  });
  double g = *std::max_element(gap.begin(), gap.end()), d = *std::max_element(drift.begin(), drift.end());
  return {g < 1e-6 && d < 1e-7, "max endpoint gap " + e3(g) + " (< 1e-6), max b drift " + e3(d) + " (< 1e-7)"};
}

// 4. Abel residuals and length, n = 3
Outcome abel() {
  const LiouvilleManifold& M = ell3();
  std::mt19937_64 rng(104);
  std::vector<CovectorState> eta;
  for (int k = 0; k < 50; ++k) eta.push_back(random_covector(M, interior_point(M, rng), rng));
  std::vector<double> res(50), len(50);
  parallel_for(50, g_workers, [&](int k) {
    GeodesicTrace tr = integrate_geodesic(M, eta[k], 10);
    Polynomial monic({0.7, -1.1, 1.0});
    for (double t : {1.7, 5.0, 10.0}) {
      for (int l = 1; l <= 2; ++l)
        res[k] = std::max(res[k], std::abs(abel_residual(tr, 0, t, l).residual));
      len[k] = std::max(len[k], std::abs(length_from_sigma(tr, monic, 0, t) - t));
    }
  });
  double r = *std::max_element(res.begin(), res.end()), l = *std::max_element(len.begin(), len.end());
  return {r < 1e-6 && l < 1e-6, "max residual " + e3(r) + " (< 1e-6), max length error " + e3(l) + " (< 1e-6)"};
}

// 5. generic base, n = 3, 32x32 hemisphere grid
Outcome generic_cut_locus() {
  const LiouvilleManifold& M = ell3();
  CutLocusOptions o;
  o.workers = g_workers;
  CutLocusMesh m = build_cut_locus(M, base3(), 32, 32, o);
  PairReport pr = pair_coincidence_audit(m);
  StructureReport st = mesh_structure(m);
  ConjugacyAuditOptions co;
  co.interior_samples = 50;
  co.workers = g_workers;
  ConjugacyAudit ca = boundary_conjugacy_audit(M, m, co);
  int bad_mult = 0, boundary = 0;
  for (const auto& e : ca.entries)
    if (e.boundary) {
      ++boundary;
      if (e.multiplicity != 1) ++bad_mult;
    }
  bool a = pr.max_dt < 1e-8, b = pr.max_gap < 1e-5, c = st.max_lambda_dev < 1e-7;
  bool d = ca.min_interior_ratio > 1e-6, e = ca.max_dt < 1e-6 && bad_mult == 0;
  std::ostringstream os;
  os << "(a) dt " << e3(pr.max_dt) << " (b) gap " << e3(pr.max_gap) << " (c) lambda_n "
     << e3(st.max_lambda_dev) << " (d) min sv ratio " << e3(ca.min_interior_ratio) << " (e) |t1-t0| "
     << e3(ca.max_dt) << ", " << bad_mult << "/" << boundary << " wrong multiplicity; "
     << m.vertices.size() << " vertices, " << m.holes() << " holes, " << ca.failed << " failed, "
     << ca.skipped << " skipped";
  return {a && b && c && d && e && m.holes() == 0 && ca.failed == 0 && ca.skipped == 0, os.str()};
}

// 6. n = 2 arc
Outcome arc_regression() {
  const CutLocusMesh& m = arc2();
  StructureReport st = mesh_structure(m);
  AntipodalReport ap = antipodal_audit(m);
  return {st.max_lambda_dev < 1e-6 && ap.pass && ap.margin > 0.01 && m.holes() == 0,
          "max lambda_2 deviation " + e3(st.max_lambda_dev) + " (< 1e-6), antipode margin " +
              fmt("%.4f", ap.margin) + " of arc (> 0.01), distance to arc " + e3(ap.distance)};
}

// 7. brute-force shooting at 10 interior cut points
Outcome minimality() {
  const LiouvilleManifold& M = ell2();
  const CutLocusMesh& m = arc2();
  BandPoint p0 = make_point(M, m.p0_x);
  std::vector<int> interior;
  for (int i = 0; i < int(m.vertices.size()); ++i)
    if (m.vertices[i].ok && !m.vertices[i].boundary) interior.push_back(i);
  MinimalityOptions mo;
  mo.resolution = 2000;
  mo.workers = g_workers;
  int fail = 0, pass = 0, inconclusive = 0;
  double worst = INFINITY;
  for (int k = 0; k < 10; ++k) {
    const CutVertex& v = m.vertices[interior[(k * interior.size() + interior.size() / 2) / 10]];
    MinimalityReport r = minimality_audit(M, p0, v.u, v.t0, mo);
    if (r.verdict == Verdict::Fail) ++fail;
    if (r.verdict == Verdict::Pass) ++pass;
    if (r.verdict == Verdict::Inconclusive) ++inconclusive;
    worst = std::min(worst, r.min_arrival - (v.t0 - 2e-3));
  }
  return {fail == 0 && pass + inconclusive == 10,
          std::to_string(pass) + " pass, " + std::to_string(inconclusive) + " no ray in ball, " +
              std::to_string(fail) + " early arrivals; min (arrival - (t0 - 2e-3)) " + e3(worst)};
}

// 8. base point in J_2, n = 3
Outcome degenerate() {
  const LiouvilleManifold& M = ell3();
  BandPoint p = make_point(M, {M.f(1).inverse(3.5), 0.0, M.alpha(3) / 4});
  std::vector<double> u0 = ellipsoid_embed(M, p);
  DegenerateOptions d;
  d.base.workers = g_workers;
  CutLocusMesh m = build_cut_locus_degenerate(M, u0, 512, d);
  CutLocusOptions io;
  io.workers = g_workers;
  CutLocusMesh I = intrinsic_cut_locus_J(M, u0, 1024, 0, io);
  double h = hausdorff_polyline(ordered_positions(m), ordered_positions(I));
  double spread = 0;
  for (const auto& v : m.vertices) spread = std::max(spread, v.s1_spread);
  int m0 = m.vertices.front().conj_mult, m1 = m.vertices.back().conj_mult;
  return {h < 1e-5 && spread < 1e-6 && m0 == 2 && m1 == 2 && m.holes() == 0,
          "Hausdorff " + e3(h) + " (< 1e-5), circle spread " + e3(spread) +
              " (< 1e-6), endpoint multiplicities " + std::to_string(m0) + "," + std::to_string(m1)};
}

// 9. zero pattern, symplectic drift, non-vanishing window
Outcome jacobi_structure() {
  const LiouvilleManifold& M = ell3();
  const double T = 12;
  std::mt19937_64 rng(109);
  std::vector<CovectorState> eta;
  for (int k = 0; k < 20; ++k) eta.push_back(random_covector(M, interior_point(M, rng), rng));
  std::vector<double> align(20), drift(20), wmin(20, INFINITY);
  std::vector<int> pattern_fail(20), checked(20), inconclusive(20), draws(20);
  parallel_for(20, g_workers, [&](int k) {
    std::mt19937_64 r(1000 + k);
    std::uniform_real_distribution<double> U(0, 1);
    GeodesicTrace tr = integrate_geodesic(M, eta[k], T);
    drift[k] = omega_drift(linearized_flow(M, eta[k], T));
    // audit windows of length T starting at the first element of S_i
    GeodesicTrace lt = integrate_geodesic(M, eta[k], 3 * T);
    for (int i = 1; i <= 2; ++i) {
      std::vector<double> S = s_set(lt, i, M.deg_tol());
      if (S.empty() || S[0] > 2 * T) continue;
      ZeroPatternReport z = zero_pattern_audit(M, lt, i, S[0], S[0] + T);
      ++checked[k];
      if (z.inconclusive) ++inconclusive[k];
      else if (!z.pass) ++pattern_fail[k];
      align[k] = std::max(align[k], z.max_alignment_error);
    }
    BandConfig cfg = tr.b0.config(M.spectrum());
    while (draws[k] < 50) {
      double s1 = 0.25 * T * U(r);
      int i = 1 + draws[k] % 2;
      bool inS = false;
      for (double s : s_set(tr, i, M.deg_tol())) inS = inS || std::abs(s - s1) < 1e-6;
      if (inS) continue;
      // window: up to the first time some sigma_l has advanced by a full band excursion
      double end = T;
      for (int l = 1; l <= 3; ++l) {
        double full = 2 * (cfg.hi(l) - cfg.lo(l)), base = tr.sigma(l, s1), lo = s1, hi = T;
        if (tr.sigma(l, hi) - base <= full) continue;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          (tr.sigma(l, mid) - base <= full ? lo : hi) = mid;
        }
        end = std::min(end, lo);
      }
      FamilyField Y = family_field(M, tr, i, s1, end);
      double s2 = s1 + (end - s1) * (0.02 + 0.98 * U(r));
      wmin[k] = std::min(wmin[k], Y.norm(M, s2));
      ++draws[k];
    }
  });
  double a = *std::max_element(align.begin(), align.end());
  double d = *std::max_element(drift.begin(), drift.end());
  double w = *std::min_element(wmin.begin(), wmin.end());
  int pf = 0, ch = 0, dr = 0, inc = 0;
  for (int k = 0; k < 20; ++k)
    pf += pattern_fail[k], ch += checked[k], dr += draws[k], inc += inconclusive[k];
  return {pf == 0 && inc == 0 && ch > 0 && a <= 1e-6 && d < 1e-8 && w > 1e-8,
          "alignment " + e3(a) + " (<= 1e-6) over " + std::to_string(ch) + " fields, " +
              std::to_string(pf) + " pattern failures, " + std::to_string(inc) + " inconclusive; Omega drift " + e3(d) + " (< 1e-8); min |Y| " +
              e3(w) + " over " + std::to_string(dr) + " window draws"};
}

// 10. byte-identical outputs across runs and worker counts
Outcome determinism() {
  const std::string d = LIOUVILLE_DATA_DIR;
  std::vector<std::vector<std::string>> cmds = {
      {"verify", "--spec", d + "/ellipsoid_4321.json", "--draws", "200", "--seed", "5", "--json"},
      {"cut-locus", "--spec", d + "/ellipsoid_4321.json", "--point", "0.3,0.4,0.2", "--res", "6x8"},
      {"cut-locus", "--spec", d + "/triaxial_321.json", "--point", "0.6,0.5", "--res", "16x3"},
      {"geodesic", "--spec", d + "/ellipsoid_4321.json", "--point", "0.3,0.4,0.2", "--eta", "1,2,3",
       "--T", "5"},
  };
  int same = 0;
  for (const auto& base : cmds) {
    std::vector<std::string> texts;
    for (const char* w : {"1", "1", "8"}) {
      auto args = base;
      args.insert(args.end(), {"--workers", w});
      std::ostringstream out, err;
      if (run_cli(args, out, err) != kExitOk) texts.push_back("exit failure: " + err.str());
      else texts.push_back(out.str());
    }
    if (texts[0] == texts[1] && texts[0] == texts[2] && texts[0].rfind("exit failure", 0) != 0) ++same;
  }
  return {same == int(cmds.size()),
          std::to_string(same) + "/" + std::to_string(cmds.size()) +
              " commands byte-identical across two runs and workers 1 vs 8"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string only;
  app.add_option("--workers", g_workers)->check(CLI::PositiveNumber);
  app.add_option("--only", only, "comma list of criteria to run");
  CLI11_PARSE(app, argc, argv);
  std::set<int> pick;
  if (!only.empty())
    for (double v : parse_list(only, "--only")) pick.insert(int(v));

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double limit_s;  // runtime budget, 0 = none
  };
  std::vector<Criterion> all = {
      {1, "identity suite", identities, 60},
      {2, "inequality suite", inequalities, 120},
      {3, "integrator vs ambient RK4", integrator, 60},
      {4, "Abel residuals", abel, 0},
      {5, "cut time, generic base", generic_cut_locus, 600},
      {6, "n = 2 arc", arc_regression, 0},
      {7, "minimality", minimality, 0},
      {8, "degenerate base", degenerate, 0},
      {9, "Jacobi structure", jacobi_structure, 0},
      {10, "determinism", determinism, 0},
  };
  std::cout << "workers " << g_workers << ", hardware threads " << std::thread::hardware_concurrency()
            << "\n";
  int failed = 0;
  double total = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total += s;
    std::string timing = fmt("%.1f s", s);
    if (c.limit_s > 0) {
      timing += fmt(" (budget %.0f s)", c.limit_s);
      if (s > c.limit_s) {
        o.pass = false;
        timing += " over budget";
      }
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s: %s  %s  [%s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("total %.1f s, %d failed\n", total, failed);
  return failed ? 1 : 0;
}
