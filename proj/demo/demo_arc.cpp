// Cut locus of a point on the triaxial ellipsoid (3,2,1): an arc of the
// coordinate curve lambda_2 = lambda_2(p0) through the antipode.
//   demo_arc [out.ply]

#include <cstdio>
#include <fstream>

#include "liouville/cutlocus.hpp"
#include "liouville/mesh_io.hpp"

using namespace liouville;

int main(int argc, char** argv) {
  LiouvilleManifold M(AxisSpectrum({3, 2, 1}), GeneratorFunction::sqrt());
  BandPoint p0 = make_point(M, {0.3 * M.alpha(1) / 4, 0.6 * M.alpha(2) / 4});
  CutLocusMesh m = build_cut_locus(M, p0, 32, 0);

  std::printf("p0 = (%.6f, %.6f, %.6f), lambda = (%.6f, %.6f)\n", m.p0_u[0], m.p0_u[1], m.p0_u[2],
              m.p0_lambda[0], m.p0_lambda[1]);
  std::printf("%4s %10s %10s %10s %10s %6s\n", "k", "t0", "u0", "u1", "u2", "conj");
  for (const auto& v : m.vertices)
    std::printf("%4d %10.6f %10.6f %10.6f %10.6f %6d\n", v.ring, v.t0, v.u[0], v.u[1], v.u[2],
                v.conj_mult);

  StructureReport st = mesh_structure(m);
  AntipodalReport ap = antipodal_audit(m);
  std::printf("lambda_2 deviation %.2e, antipode margin %.3f of the arc\n", st.max_lambda_dev,
              ap.margin);
  if (argc > 1) {
    std::ofstream(argv[1]) << mesh_ply_text(m);
    std::printf("wrote %s\n", argv[1]);
  }
  return 0;
}
