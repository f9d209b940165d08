#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "liouville/model.hpp"

namespace liouville {

inline constexpr const char* kVersion = "0.1.0";

// A parsed manifold spec file.
struct ManifoldSpec {
  AxisSpectrum a;
  GeneratorFunction A;
  Tolerances tol;
  std::string path;       // resolved file path, empty for inline specs
  std::string canonical;  // canonical JSON used for hashing
  std::uint64_t hash = 0;

  std::string hash_hex() const;
};

std::uint64_t fnv1a64(const std::string& bytes);

ManifoldSpec parse_spec(const nlohmann::json& j);
ManifoldSpec parse_spec_text(const std::string& text);

// Reads a spec file. Relative paths that do not exist are retried under
// $LIOUVILLE_SPEC_DIR.
ManifoldSpec load_spec(const std::string& path);

nlohmann::ordered_json tolerances_json(const Tolerances& t);

// Binary period sidecar: "<dir>/periods-<hash>.bin".
std::string sidecar_path(const ManifoldSpec& s, const std::string& dir);
void write_period_sidecar(const std::string& file, const ManifoldSpec& s, const PeriodTable& t);
// Returns false when the file is absent or was written for a different spec.
bool read_period_sidecar(const std::string& file, const ManifoldSpec& s, PeriodTable& t);

// Builds the manifold, reusing a sidecar under cache_dir when present (cache_dir
// empty: always compute).
LiouvilleManifold make_manifold(const ManifoldSpec& s, const std::string& cache_dir = "");

}  // namespace liouville
