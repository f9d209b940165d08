#include "spec_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace liouville {

namespace {

constexpr char kMagic[8] = {'L', 'V', 'P', 'E', 'R', '0', '0', '1'};

double number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string("spec: ") + what + " must be a number");
  return j.get<double>();
}

std::vector<double> numbers(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string("spec: ") + what + " must be an array");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(number(e, what));
  return v;
}

Tolerances parse_tolerances(const nlohmann::json& j) {
  Tolerances t;
  if (!j.is_object()) throw InputError("spec: tolerances must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    double v = number(it.value(), k.c_str());
    if (!(v > 0)) throw InputError("spec: tolerance " + k + " must be positive");
    if (k == "rtol") t.rtol = v;
    else if (k == "atol") t.atol = v;
    else if (k == "degeneracy") t.degeneracy = v;
    else if (k == "energy_step") t.energy_step = v;
    else if (k == "b_drift_abort") t.b_drift_abort = v;
    else if (k == "time") t.time = v;
    else if (k == "multiplicity") t.multiplicity = v;
    else if (k == "branch_guard") t.branch_guard = v;
    else throw InputError("spec: unknown tolerance '" + k + "'");
  }
  return t;
}

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void put_vec(std::ostream& os, const std::vector<double>& v) {
  put_u64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}
bool get_u64(std::istream& is, std::uint64_t& v) {
  return bool(is.read(reinterpret_cast<char*>(&v), 8));
}
bool get_vec(std::istream& is, std::vector<double>& v) {
  std::uint64_t k;
  if (!get_u64(is, k) || k > (1u << 24)) return false;
  v.resize(k);
  return bool(is.read(reinterpret_cast<char*>(v.data()), std::streamsize(k * sizeof(double))));
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string ManifoldSpec::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

nlohmann::ordered_json tolerances_json(const Tolerances& t) {
  return {{"rtol", t.rtol},
          {"atol", t.atol},
          {"degeneracy", t.degeneracy},
          {"energy_step", t.energy_step},
          {"b_drift_abort", t.b_drift_abort},
          {"time", t.time},
          {"multiplicity", t.multiplicity},
          {"branch_guard", t.branch_guard}};
}

ManifoldSpec parse_spec(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("spec: top level must be an object");
  for (const char* k : {"a", "A"})
    if (!j.contains(k)) throw InputError(std::string("spec: missing field '") + k + "'");
  ManifoldSpec s;
  std::vector<double> a = numbers(j.at("a"), "a");
  s.a = AxisSpectrum(a);
  if (j.contains("n")) {
    if (!j.at("n").is_number_integer()) throw InputError("spec: n must be an integer");
    int n = j.at("n").get<int>();
    if (n != s.a.n())
      throw InputError("spec: n = " + std::to_string(n) + " but a has " + std::to_string(a.size()) +
                       " entries (expected n + 1)");
  }
  const auto& A = j.at("A");
  if (!A.is_object() || !A.contains("kind") || !A.at("kind").is_string())
    throw InputError("spec: A must be an object with a string 'kind'");
  std::string kind = A.at("kind").get<std::string>();
  std::vector<double> coeffs;
  if (A.contains("coeffs")) coeffs = numbers(A.at("coeffs"), "A.coeffs");
  nlohmann::ordered_json Ajs;
  Ajs["kind"] = kind;
  if (kind == "sqrt") {
    s.A = GeneratorFunction::sqrt(coeffs);
    Ajs["coeffs"] = coeffs;
  } else if (kind == "const") {
    double c = coeffs.empty() ? 1.0 : coeffs.front();
    if (coeffs.size() > 1) throw InputError("spec: const generator takes one coefficient");
    s.A = GeneratorFunction::constant(c);
    Ajs["coeffs"] = std::vector<double>{c};
  } else if (kind == "poly") {
    if (coeffs.empty()) throw InputError("spec: poly generator needs coefficients");
    s.A = GeneratorFunction::polynomial(coeffs);
    Ajs["coeffs"] = coeffs;
  } else if (kind == "table") {
    if (!A.contains("lo") || !A.contains("hi") || !A.contains("values"))
      throw InputError("spec: table generator needs lo, hi and values");
    double lo = number(A.at("lo"), "A.lo"), hi = number(A.at("hi"), "A.hi");
    std::vector<double> v = numbers(A.at("values"), "A.values");
    s.A = GeneratorFunction::table(lo, hi, v);
    if (lo > s.a[s.a.n()] || hi < s.a[0])
      throw InputError("spec: table generator does not cover [a_n, a_0]");
    Ajs["lo"] = lo;
    Ajs["hi"] = hi;
    Ajs["values"] = v;
  } else {
    throw InputError("spec: unknown generator kind '" + kind + "'");
  }
  s.A.check_positive(s.a[s.a.n()], s.a[0]);
  if (j.contains("tolerances")) s.tol = parse_tolerances(j.at("tolerances"));
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k != "n" && k != "a" && k != "A" && k != "tolerances" && k != "name" && k != "comment")
      throw InputError("spec: unknown field '" + k + "'");
  }
  nlohmann::ordered_json c;
  c["n"] = s.a.n();
  c["a"] = a;
  c["A"] = Ajs;
  c["tolerances"] = tolerances_json(s.tol);
  s.canonical = c.dump();
  s.hash = fnv1a64(s.canonical);
  return s;
}

ManifoldSpec parse_spec_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("spec: malformed JSON: ") + e.what());
  }
  return parse_spec(j);
}

ManifoldSpec load_spec(const std::string& path) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (!fs::exists(p) && p.is_relative()) {
    if (const char* dir = std::getenv("LIOUVILLE_SPEC_DIR")) {
      fs::path q = fs::path(dir) / p;
      if (fs::exists(q)) p = q;
    }
  }
  std::ifstream in(p);
  if (!in) throw InputError("cannot open spec file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ManifoldSpec s = parse_spec_text(ss.str());
  s.path = p.string();
  return s;
}

std::string sidecar_path(const ManifoldSpec& s, const std::string& dir) {
  return (std::filesystem::path(dir) / ("periods-" + s.hash_hex() + ".bin")).string();
}

void write_period_sidecar(const std::string& file, const ManifoldSpec& s, const PeriodTable& t) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw InputError("cannot write period sidecar " + file);
  os.write(kMagic, 8);
  put_u64(os, s.hash);
  put_u64(os, t.f.size());
  for (const auto& f : t.f) {
    double h0 = f.h0();
    os.write(reinterpret_cast<const char*>(&h0), sizeof h0);
    put_vec(os, f.forward_series());
    put_vec(os, f.inverse_series());
  }
}

bool read_period_sidecar(const std::string& file, const ManifoldSpec& s, PeriodTable& t) {
  std::ifstream is(file, std::ios::binary);
  if (!is) return false;
  char magic[8];
  std::uint64_t hash, count;
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return false;
  if (!get_u64(is, hash) || hash != s.hash) return false;
  if (!get_u64(is, count) || int(count) != s.a.n()) return false;
  PeriodTable r;
  for (int i = 1; i <= s.a.n(); ++i) {
    double h0;
    std::vector<double> fwd, inv;
    if (!is.read(reinterpret_cast<char*>(&h0), sizeof h0) || !get_vec(is, fwd) || !get_vec(is, inv))
      return false;
    if (!(h0 > 0)) return false;
    r.f.emplace_back(i, s.a, s.A, h0, std::move(fwd), std::move(inv));
  }
  t = std::move(r);
  return true;
}

LiouvilleManifold make_manifold(const ManifoldSpec& s, const std::string& cache_dir) {
  if (cache_dir.empty()) return LiouvilleManifold(s.a, s.A, s.tol);
  std::string file = sidecar_path(s, cache_dir);
  PeriodTable t;
  if (read_period_sidecar(file, s, t)) return LiouvilleManifold(s.a, s.A, s.tol, std::move(t));
  LiouvilleManifold M(s.a, s.A, s.tol);
  std::filesystem::create_directories(cache_dir);
  write_period_sidecar(file, s, M.table());
  return M;
}

}  // namespace liouville
