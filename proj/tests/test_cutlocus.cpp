#include <gtest/gtest.h>

#include "common.hpp"
#include "liouville/cutlocus.hpp"
#include "liouville/mesh_io.hpp"

using namespace liouville;
using namespace testing_support;

namespace {

BandPoint base2() { return make_point(ell2(), {0.3 * ell2().alpha(1) / 4, 0.6 * ell2().alpha(2) / 4}); }
BandPoint base3() {
  const LiouvilleManifold& M = ell3();
  return make_point(M, {0.3 * M.alpha(1) / 4, 0.55 * M.alpha(2) / 4, 0.4 * M.alpha(3) / 4});
}

const CutLocusMesh& arc() {
  static CutLocusMesh m = build_cut_locus(ell2(), base2(), 12, 0);
  return m;
}
const CutLocusMesh& disk() {
  static CutLocusMesh m = build_cut_locus(ell3(), base3(), 4, 6);
  return m;
}

}  // namespace

TEST(HemisphereGrid, UnitSamplesAndExactBoundary) {
  for (auto [n, r, a] : {std::tuple{2, 5, 0}, std::tuple{3, 6, 9}}) {
    HemisphereGrid G = hemisphere_grid(n, r, a);
    for (const auto& s : G.samples) {
      double q2 = 0;
      for (double v : s.q) q2 += v * v;
      EXPECT_NEAR(q2, 1.0, 1e-15);
      EXPECT_GE(s.q.back(), 0.0);
      if (s.boundary) EXPECT_EQ(s.q.back(), 0.0);
    }
    for (int i : G.boundary_loop) EXPECT_TRUE(G.samples[i].boundary);
  }
  EXPECT_EQ(hemisphere_grid(2, 5, 40).n_ang, 2);
  EXPECT_EQ(hemisphere_grid(3, 4, 5).samples.size(), 1u + 4 * 5);
  EXPECT_THROW(hemisphere_grid(3, 4, 2), InputError);
  EXPECT_THROW(hemisphere_grid(4, 4, 4), InputError);
  EXPECT_THROW(hemisphere_grid(3, 0, 4), InputError);
}

TEST(CutLocus, ArcLiesOnCoordinateCurve) {
  const CutLocusMesh& m = arc();
  EXPECT_EQ(m.holes(), 0);
  StructureReport st = mesh_structure(m);
  EXPECT_LT(st.max_lambda_dev, 1e-6);
  EXPECT_TRUE(st.connected);
  PairReport pr = pair_coincidence_audit(m);
  EXPECT_LT(pr.max_gap, 1e-5);
  EXPECT_LT(pr.max_dt, 1e-8);
  EXPECT_EQ(pr.boundary_gap, 0.0);
  for (const auto& v : m.vertices) EXPECT_EQ(v.conj_mult, v.boundary ? 1 : 0) << v.ring;
}

TEST(CutLocus, ArcContainsAntipode) {
  AntipodalReport r = antipodal_audit(arc());
  EXPECT_TRUE(r.applicable);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.margin, 0.01);
}

TEST(CutLocus, DiskLiesOnCoordinateSurface) {
  const CutLocusMesh& m = disk();
  EXPECT_EQ(m.holes(), 0);
  StructureReport st = mesh_structure(m);
  EXPECT_LT(st.max_lambda_dev, 1e-6);
  EXPECT_TRUE(st.connected);
  EXPECT_EQ(st.injectivity_violations, 0);
  PairReport pr = pair_coincidence_audit(m);
  EXPECT_LT(pr.max_gap, 1e-5);
  EXPECT_LT(pr.max_dt, 1e-8);
  EXPECT_EQ(pr.boundary_gap, 0.0);
}

TEST(CutLocus, BoundaryConjugacy) {
  ConjugacyAuditOptions o;
  o.interior_samples = 20;
  ConjugacyAudit a = boundary_conjugacy_audit(ell3(), disk(), o);
  EXPECT_TRUE(a.pass);
  EXPECT_EQ(a.failed, 0);
  EXPECT_LT(a.max_dt, 1e-6);
  EXPECT_GT(a.min_interior_ratio, 1e-6);
}

TEST(CutLocus, RejectsBaseInJ) {
  const LiouvilleManifold& M = ell3();
  BandPoint p = make_point(M, {M.f(1).inverse(3.5), 0.0, M.alpha(3) / 4});
  EXPECT_THROW(build_cut_locus(M, p, 2, 4), InputError);
}

TEST(Minimality, BeforeAndAfterCutTime) {
  const LiouvilleManifold& M = ell2();
  BandPoint p0 = make_point(M, arc().p0_x);
  const CutVertex& v = arc().vertices[5];
  CovectorState eta{p0, v.xi};
  MinimalityOptions o;
  o.resolution = 600;
  MinimalityReport at = minimality_audit(M, p0, v.u, v.t0, o);
  EXPECT_EQ(at.verdict, Verdict::Pass);
  GeodesicTrace tr = integrate_geodesic(M, eta, v.t0 + 0.2);
  // away from the cut point neighbouring rays spread, so a coarser ball is used
  MinimalityOptions wide = o;
  wide.r_hit = 1e-2;
  double t = 0.7 * v.t0;
  EXPECT_EQ(minimality_audit(M, p0, position(M, tr, t), t, wide).verdict, Verdict::Pass);
  t = v.t0 + 0.1;
  MinimalityReport past = minimality_audit(M, p0, position(M, tr, t), t, o);
  EXPECT_EQ(past.verdict, Verdict::Fail);
  EXPECT_LT(past.min_arrival, t - 2e-3);
}

TEST(Degenerate, ArcCollapsesFamiliesAndMatchesIntrinsic) {
  const LiouvilleManifold& M = ell3();
  BandPoint p = make_point(M, {M.f(1).inverse(3.5), 0.0, M.alpha(3) / 4});
  std::vector<double> u0 = ellipsoid_embed(M, p);
  CutLocusMesh m = build_cut_locus_degenerate(M, u0, 6);
  EXPECT_TRUE(m.degenerate);
  EXPECT_EQ(m.holes(), 0);
  EXPECT_EQ(m.vertices.front().conj_mult, 2);
  EXPECT_EQ(m.vertices.back().conj_mult, 2);
  for (const auto& v : m.vertices) {
    EXPECT_LT(v.s1_spread, 1e-6);
    EXPECT_LT(v.lambda_dev, 1e-7);
    EXPECT_EQ(v.tag, v.boundary ? "first-conjugate" : "circle-family");
  }
  CutLocusMesh I = intrinsic_cut_locus_J(M, u0, 6, 0);
  // both are sampled arcs of the same curve; sampling differs, so compare loosely here
  EXPECT_LT(hausdorff_polyline(ordered_positions(m), ordered_positions(I)), 5e-2);
  auto A = ordered_positions(m), B = ordered_positions(I);
  double same = vec::dist(A.front(), B.front()) + vec::dist(A.back(), B.back());
  double flip = vec::dist(A.front(), B.back()) + vec::dist(A.back(), B.front());
  EXPECT_LT(std::min(same, flip), 1e-6);
}

TEST(MeshIO, JsonRoundTripIsByteIdentical) {
  std::string a = mesh_json_text(disk());
  CutLocusMesh back = mesh_from_json(nlohmann::ordered_json::parse(a));
  EXPECT_EQ(mesh_json_text(back), a);
  CutLocusMesh empty;
  std::string e = mesh_json_text(empty);
  EXPECT_EQ(mesh_json_text(mesh_from_json(nlohmann::ordered_json::parse(e))), e);
}

TEST(MeshIO, RejectsMalformedFiles) {
  EXPECT_THROW(mesh_from_json(nlohmann::ordered_json::parse("{\"n\": 3}")), InputError);
  nlohmann::ordered_json j = mesh_to_json(arc());
  j["cells"] = {{0, 999}};
  EXPECT_THROW(mesh_from_json(j), InputError);
}

TEST(MeshIO, PlyCounts) {
  std::string ply = mesh_ply_text(disk());
  EXPECT_NE(ply.find("element vertex " + std::to_string(disk().vertices.size())), std::string::npos);
  EXPECT_NE(ply.find("element face " + std::to_string(disk().cells.size())), std::string::npos);
  std::string arc_ply = mesh_ply_text(arc());
  EXPECT_NE(arc_ply.find("element edge " + std::to_string(arc().cells.size())), std::string::npos);
  std::size_t body = ply.find("end_header\n") + 11;
  std::size_t lines = std::count(ply.begin() + body, ply.end(), '\n');
  EXPECT_EQ(lines, disk().vertices.size() + disk().cells.size());
}

TEST(MeshIO, OutputIndependentOfWorkers) {
  CutLocusOptions o1, o4;
  o4.workers = 4;
  EXPECT_EQ(mesh_json_text(build_cut_locus(ell2(), base2(), 4, 0, o1)),
            mesh_json_text(build_cut_locus(ell2(), base2(), 4, 0, o4)));
}
