#include "bura/cache.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "bura/errors.hpp"
#include "json.hpp"

namespace bura {

const char* const kToolVersion = "bura 1.0.0";

namespace {

using json = nlohmann::ordered_json;

int digits_for(mpfr_prec_t bits) { return static_cast<int>(bits / 3 + 2); }

json strings(const std::vector<XScalar>& v, mpfr_prec_t bits) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x.to_string(digits_for(bits)));
  return a;
}

std::vector<XScalar> scalars(const json& a, Precision p) {
  std::vector<XScalar> out;
  for (const auto& s : a) out.emplace_back(s.get<std::string>(), p);
  return out;
}

std::vector<XScalar> trimmed_monomial(const ChebPoly& p) {
  auto mono = cheb_to_monomial(p);
  while (mono.size() > 1 && mono.back().is_zero()) mono.pop_back();
  return mono;
}

}  // namespace

CoefficientCacheEntry make_cache_entry(RationalApproximant r, double delta_rel) {
  CoefficientCacheEntry e;
  e.delta_rel = delta_rel;
  e.tool_version = kToolVersion;
  try {
    e.pf = to_partial_fractions(r);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::invariant) throw;
    e.decomposition_error = err.what();
  }
  e.r = std::move(r);
  return e;
}

std::string cache_entry_to_json(const CoefficientCacheEntry& e) {
  const auto& r = e.r;
  const mpfr_prec_t bits = r.precision_bits;
  json j;
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  j["m"] = r.m;
  j["k"] = r.k;
  j["precision_bits"] = bits;
  j["error"] = r.error.to_string(digits_for(bits));
  j["num_cheb"] = strings(r.num.coeffs, bits);
  j["den_cheb"] = strings(r.den.coeffs, bits);
  j["num_padded"] = r.num.padded;
  j["den_padded"] = r.den.padded;
  // Monomial coefficients in t, denominator scaled to a unit leading term.
  auto pm = trimmed_monomial(r.num);
  auto qm = trimmed_monomial(r.den);
  const XScalar lead = qm.back();
  for (auto& x : pm) x /= lead;
  for (auto& x : qm) x /= lead;
  j["num_monomial"] = strings(pm, bits);
  j["den_monomial"] = strings(qm, bits);
  j["extreme_points"] = strings(r.extreme_points, bits);
  if (e.pf) {
    j["poles"] = strings(e.pf->d_x, bits);
    j["residues"] = strings(e.pf->c_x, bits);
    j["c0"] = strings(e.pf->c0_x, bits);
  } else {
    j["decomposition_error"] = e.decomposition_error;
  }
  j["meta"] = {{"tool_version", e.tool_version}, {"iterations", r.iterations}, {"delta_rel", e.delta_rel}};
  return j.dump(1);
}

CoefficientCacheEntry cache_entry_from_json(const std::string& text) {
  CoefficientCacheEntry e;
  try {
    const json j = json::parse(text);
    auto& r = e.r;
    r.alpha = j.at("alpha").get<double>();
    r.beta = j.at("beta").get<int>();
    r.m = j.at("m").get<int>();
    r.k = j.at("k").get<int>();
    r.precision_bits = j.at("precision_bits").get<mpfr_prec_t>();
    const Precision p{r.precision_bits};
    r.error = XScalar(j.at("error").get<std::string>(), p);
    r.num.coeffs = scalars(j.at("num_cheb"), p);
    r.den.coeffs = scalars(j.at("den_cheb"), p);
    r.num.padded = j.value("num_padded", false);
    r.den.padded = j.value("den_padded", false);
    r.extreme_points = scalars(j.at("extreme_points"), p);
    const auto& meta = j.at("meta");
    r.iterations = meta.at("iterations").get<int>();
    e.delta_rel = meta.at("delta_rel").get<double>();
    e.tool_version = meta.at("tool_version").get<std::string>();
    if (j.contains("poles")) {
      PartialFractionForm pf;
      pf.alpha = r.alpha;
      pf.beta = r.beta;
      pf.m = r.m;
      pf.k = r.k;
      pf.precision_bits = r.precision_bits;
      pf.error_x = r.error;
      pf.d_x = scalars(j.at("poles"), p);
      pf.c_x = scalars(j.at("residues"), p);
      pf.c0_x = scalars(j.at("c0"), p);
      for (const auto& x : pf.c0_x) pf.c0.push_back(x.to_double());
      for (const auto& x : pf.c_x) pf.c.push_back(x.to_double());
      for (const auto& x : pf.d_x) pf.d.push_back(x.to_double());
      pf.error = pf.error_x.to_double();
      e.pf = std::move(pf);
    } else {
      e.decomposition_error = j.value("decomposition_error", std::string("no decomposition stored"));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw CacheCorrupt(std::string("malformed cache entry: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw CacheCorrupt(std::string("malformed cache entry: ") + ex.what());
  }
  return e;
}

CoefficientCache::CoefficientCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path CoefficientCache::file_for(double alpha, int beta, int m, int k, mpfr_prec_t bits) const {
  char name[128];
  std::snprintf(name, sizeof name, "bura_a%.10g_b%d_m%d_k%d_p%ld.json", alpha, beta, m, k, static_cast<long>(bits));
  return dir_ / name;
}

void CoefficientCache::put(const CoefficientCacheEntry& e) const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
  const auto target = file_for(e.r.alpha, e.r.beta, e.r.m, e.r.k, e.r.precision_bits);
  std::random_device rd;
  const auto tmp = target.string() + ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << cache_entry_to_json(e) << '\n';
    if (!out.flush()) throw IoError("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move cache entry into place: " + ec.message());
  }
}

CoefficientCacheEntry CoefficientCache::get(double alpha, int beta, int m, int k, mpfr_prec_t bits) const {
  const auto path = file_for(alpha, beta, m, k, bits);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheMiss("no cache entry " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  CoefficientCacheEntry e = cache_entry_from_json(ss.str());
  if (e.r.beta != beta || e.r.m != m || e.r.k != k || e.r.precision_bits != bits || e.r.alpha != alpha)
    throw CacheCorrupt(path.string() + ": parameters do not match the file name");
  const std::string why = check_approximant(e.r, e.delta_rel);
  if (!why.empty()) throw CacheCorrupt(path.string() + ": " + why);
  if (e.pf) {
    try {
      validate_partial_fractions(*e.pf, e.r);
    } catch (const Error& err) {
      throw CacheCorrupt(path.string() + ": " + err.what());
    }
  }
  return e;
}

CoefficientCacheEntry CoefficientCache::get_or_compute(double alpha, int beta, int m, int k,
                                                       const RemezConfig& cfg) const {
  try {
    return get(alpha, beta, m, k, cfg.precision_bits);
  } catch (const CacheMiss&) {
  } catch (const CacheCorrupt&) {
  }
  CoefficientCacheEntry e = make_cache_entry(compute_bura(alpha, beta, m, k, cfg), cfg.delta_rel);
  put(e);
  return e;
}

}  // namespace bura
