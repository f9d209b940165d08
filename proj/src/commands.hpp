#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "liouville/model.hpp"

namespace liouville {

enum ExitCode { kExitOk = 0, kExitContract = 1, kExitInput = 2, kExitUsage = 64 };

// Reproducibility header written by every command. Worker counts are left out on
// purpose: outputs must not depend on them.
struct RunHeader {
  std::string version;
  std::string command;
  std::string spec_hash;
  std::uint64_t seed = 0;
  Tolerances tol;

  nlohmann::ordered_json to_json() const;
  static RunHeader from_json(const nlohmann::json& j);
  // "<prefix>run {json}" on one line, e.g. prefix "# " for CSV, "comment " for PLY.
  std::string line(const std::string& prefix) const;
  // Finds and parses the header line in a text file body; throws InputError if absent.
  static RunHeader parse(const std::string& text);
};

bool operator==(const RunHeader& a, const RunHeader& b);

std::vector<double> parse_list(const std::string& s, const std::string& what);

// Unit vector on S^{n-1} from n-1 hyperspherical angles, the first measured from e_n.
std::vector<double> sphere_from_angles(const std::vector<double>& th);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace liouville
