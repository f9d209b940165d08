#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "cutlocus.hpp"

namespace liouville {

// Structured-text mesh format (JSON). Top level:
//   n, spectrum, generator, degenerate, n_rad, n_ang, p0 {x, lambda, u},
//   vertices [ {ring, slot, boundary, q, xi, v0, ok, error, t0, x, lambda, u, tag,
//               conj_mult, lambda_dev, pair_gap, pair_dt, s1_spread, nudged,
//               cut_case, warning} ],
//   cells [[i, j(, k)]], boundary_loop [i...]
// Doubles are written with round-trip precision, so export -> import -> export is
// byte-identical.

inline nlohmann::ordered_json vertex_to_json(const CutVertex& v) {
  nlohmann::ordered_json j;
  j["ring"] = v.ring;
  j["slot"] = v.slot;
  j["boundary"] = v.boundary;
  j["q"] = v.q;
  j["xi"] = v.xi;
  j["v0"] = v.v0;
  j["ok"] = v.ok;
  j["error"] = v.error;
  j["t0"] = v.t0;
  j["x"] = v.x;
  j["lambda"] = v.lambda;
  j["u"] = v.u;
  j["tag"] = v.tag;
  j["conj_mult"] = v.conj_mult;
  j["lambda_dev"] = v.lambda_dev;
  j["pair_gap"] = v.pair_gap;
  j["pair_dt"] = v.pair_dt;
  j["s1_spread"] = v.s1_spread;
  j["nudged"] = v.nudged;
  j["cut_case"] = v.cut_case;
  j["warning"] = v.warning;
  return j;
}

inline CutVertex vertex_from_json(const nlohmann::ordered_json& j) {
  CutVertex v;
  v.ring = j.at("ring").get<int>();
  v.slot = j.at("slot").get<int>();
  v.boundary = j.at("boundary").get<bool>();
  v.q = j.at("q").get<std::vector<double>>();
  v.xi = j.at("xi").get<std::vector<double>>();
  v.v0 = j.at("v0").get<std::vector<double>>();
  v.ok = j.at("ok").get<bool>();
  v.error = j.at("error").get<std::string>();
  v.t0 = j.at("t0").get<double>();
  v.x = j.at("x").get<std::vector<double>>();
  v.lambda = j.at("lambda").get<std::vector<double>>();
  v.u = j.at("u").get<std::vector<double>>();
  v.tag = j.at("tag").get<std::string>();
  v.conj_mult = j.at("conj_mult").get<int>();
  v.lambda_dev = j.at("lambda_dev").get<double>();
  v.pair_gap = j.at("pair_gap").get<double>();
  v.pair_dt = j.at("pair_dt").get<double>();
  v.s1_spread = j.at("s1_spread").get<double>();
  v.nudged = j.at("nudged").get<bool>();
  v.cut_case = j.at("cut_case").get<std::string>();
  v.warning = j.at("warning").get<std::string>();
  return v;
}

inline nlohmann::ordered_json mesh_to_json(const CutLocusMesh& m) {
  nlohmann::ordered_json j;
  j["n"] = m.n;
  j["spectrum"] = m.spectrum;
  j["generator"] = m.generator;
  j["degenerate"] = m.degenerate;
  j["n_rad"] = m.n_rad;
  j["n_ang"] = m.n_ang;
  j["p0"] = {{"x", m.p0_x}, {"lambda", m.p0_lambda}, {"u", m.p0_u}};
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const auto& v : m.vertices) vs.push_back(vertex_to_json(v));
  j["vertices"] = vs;
  j["cells"] = m.cells;
  j["boundary_loop"] = m.boundary_loop;
  return j;
}

inline CutLocusMesh mesh_from_json(const nlohmann::ordered_json& j) {
  CutLocusMesh m;
  try {
    m.n = j.at("n").get<int>();
    m.spectrum = j.at("spectrum").get<std::vector<double>>();
    m.generator = j.at("generator").get<std::string>();
    m.degenerate = j.at("degenerate").get<bool>();
    m.n_rad = j.at("n_rad").get<int>();
    m.n_ang = j.at("n_ang").get<int>();
    m.p0_x = j.at("p0").at("x").get<std::vector<double>>();
    m.p0_lambda = j.at("p0").at("lambda").get<std::vector<double>>();
    m.p0_u = j.at("p0").at("u").get<std::vector<double>>();
    for (const auto& v : j.at("vertices")) m.vertices.push_back(vertex_from_json(v));
    m.cells = j.at("cells").get<std::vector<std::vector<int>>>();
    m.boundary_loop = j.at("boundary_loop").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed mesh file: ") + e.what());
  }
  for (const auto& c : m.cells)
    for (int i : c)
      if (i < 0 || i >= int(m.vertices.size())) throw InputError("malformed mesh file: cell index out of range");
  return m;
}

inline std::string mesh_json_text(const CutLocusMesh& m) { return mesh_to_json(m).dump(1) + "\n"; }

inline CutLocusMesh read_mesh_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed mesh file " + path + ": " + e.what());
  }
  return mesh_from_json(j);
}

// ASCII PLY. Vertex positions are the ambient u for A = sqrt and otherwise the
// elliptic coordinates padded with zeros to n + 1 entries (warning set). Failed
// vertices are dropped and cells touching them removed. Arcs (n = 2 or a J base)
// are written as an edge element, disks as faces.
inline std::string mesh_ply_text(const CutLocusMesh& m, std::string* warning = nullptr) {
  const bool ambient = m.generator == "sqrt";
  if (!ambient && warning)
    *warning = "generator is not sqrt: PLY positions are elliptic coordinates padded with zeros";
  std::vector<int> remap(m.vertices.size(), -1);
  int nv = 0;
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    if (m.vertices[i].ok) remap[i] = nv++;
  std::vector<std::vector<int>> cells;
  for (const auto& c : m.cells) {
    std::vector<int> r;
    for (int i : c)
      if (remap[i] >= 0) r.push_back(remap[i]);
    if (r.size() == c.size()) cells.push_back(r);
  }
  const bool edges = !m.cells.empty() ? m.cells.front().size() == 2 : m.n <= 2 || m.degenerate;
  const int dim = m.n + 1;
  static const char* names[] = {"x", "y", "z", "w"};
  std::ostringstream os;
  os << "ply\nformat ascii 1.0\n";
  os << "comment cut locus n=" << m.n << " generator=" << m.generator
     << (m.degenerate ? " base=J" : "") << "\n";
  os << "element vertex " << nv << "\n";
  for (int k = 0; k < dim; ++k) {
    if (k < 4)
      os << "property double " << names[k] << "\n";
    else
      os << "property double x" << k << "\n";
  }
  os << "property double t0\nproperty uchar boundary\nproperty int conj_mult\n";
  if (edges)
    os << "element edge " << cells.size() << "\nproperty int vertex1\nproperty int vertex2\n";
  else
    os << "element face " << cells.size() << "\nproperty list uchar int vertex_indices\n";
  os << "end_header\n";
  char buf[64];
  for (const auto& v : m.vertices) {
    if (!v.ok) continue;
    for (int k = 0; k < dim; ++k) {
      double c = 0;
      if (ambient)
        c = k < int(v.u.size()) ? v.u[k] : 0.0;
      else
        c = k < int(v.lambda.size()) ? v.lambda[k] : 0.0;
      std::snprintf(buf, sizeof buf, "%.17g", c);
      os << buf << ' ';
    }
    std::snprintf(buf, sizeof buf, "%.17g", v.t0);
    os << buf << ' ' << (v.boundary ? 1 : 0) << ' ' << v.conj_mult << "\n";
  }
  for (const auto& c : cells) {
    if (!edges) os << c.size();
    for (std::size_t k = 0; k < c.size(); ++k) os << (edges && k == 0 ? "" : " ") << c[k];
    os << "\n";
  }
  return os.str();
}

}  // namespace liouville
