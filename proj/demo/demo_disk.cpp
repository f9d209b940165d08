// Cut locus of a generic point on the ellipsoid (4,3,2,1): a disk inside the
// hypersurface lambda_3 = lambda_3(p0), bounded by first conjugate points.
//   demo_disk [out.ply] [R] [A]

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "liouville/cutlocus.hpp"
#include "liouville/mesh_io.hpp"

using namespace liouville;

int main(int argc, char** argv) {
  int R = argc > 2 ? std::atoi(argv[2]) : 8, A = argc > 3 ? std::atoi(argv[3]) : 16;
  LiouvilleManifold M(AxisSpectrum({4, 3, 2, 1}), GeneratorFunction::sqrt());
  BandPoint p0 = make_point(M, {0.3 * M.alpha(1) / 4, 0.55 * M.alpha(2) / 4, 0.4 * M.alpha(3) / 4});
  CutLocusMesh m = build_cut_locus(M, p0, R, A);

  StructureReport st = mesh_structure(m);
  PairReport pr = pair_coincidence_audit(m);
  int boundary = 0, conj1 = 0;
  double tmin = INFINITY, tmax = 0;
  for (const auto& v : m.vertices) {
    tmin = std::min(tmin, v.t0);
    tmax = std::max(tmax, v.t0);
    if (v.boundary) {
      ++boundary;
      if (v.conj_mult == 1) ++conj1;
    }
  }
  std::printf("%zu vertices, %zu triangles, %d holes\n", m.vertices.size(), m.cells.size(), m.holes());
  std::printf("cut time in [%.6f, %.6f]\n", tmin, tmax);
  std::printf("lambda_3 deviation %.2e, reflected pair gap %.2e\n", st.max_lambda_dev, pr.max_gap);
  std::printf("boundary: %d of %d vertices conjugate with multiplicity 1\n", conj1, boundary);
  std::printf("connected %s, injectivity violations %d\n", st.connected ? "yes" : "no",
              st.injectivity_violations);
  if (argc > 1) {
    std::ofstream(argv[1]) << mesh_ply_text(m);
    std::printf("wrote %s\n", argv[1]);
  }
  return 0;
}
