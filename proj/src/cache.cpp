#include "mfres/cache.hpp"

#include "mfres/errors.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace mfres {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw CacheError("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

class LockFile {
 public:
  explicit LockFile(fs::path path) : path_(std::move(path)) {
    using namespace std::chrono_literals;
    const auto deadline = std::chrono::steady_clock::now() + 60s;
    for (;;) {
      fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd_ >= 0) return;
      if (errno != EEXIST) throw CacheError("cannot create lock " + path_.string() + ": " + std::strerror(errno));
      if (std::chrono::steady_clock::now() > deadline) throw CacheError("timed out waiting for lock " + path_.string());
      std::this_thread::sleep_for(50ms);
    }
  }
  ~LockFile() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CacheError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw CacheError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw CacheError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace

CacheManifest::CacheManifest(fs::path root) : root_(std::move(root)) { read_manifest(); }

void CacheManifest::read_manifest() {
  entries_.clear();
  const fs::path path = root_ / "manifest.json";
  if (!fs::exists(path)) return;
  json doc;
  try {
    doc = json::parse(read_file(path));
    for (const auto& e : doc.at("entries"))
      entries_.push_back({e.at("kind").get<std::string>(), e.at("weight").get<int>(), e.at("precision").get<std::int64_t>(),
                          e.at("file").get<std::string>(), e.at("sha256").get<std::string>()});
  } catch (const json::exception& ex) {
    throw CacheError("malformed manifest " + path.string() + ": " + ex.what());
  }
}

void CacheManifest::write_manifest() const {
  json doc;
  doc["entries"] = json::array();
  for (const auto& e : entries_)
    doc["entries"].push_back(
        {{"kind", e.kind}, {"weight", e.weight}, {"precision", e.precision}, {"file", e.file}, {"sha256", e.sha256}});
  write_file_atomic(root_ / "manifest.json", doc.dump(2) + "\n");
}

std::optional<CacheEntry> CacheManifest::find(const std::string& kind, int weight, std::int64_t precision) const {
  std::optional<CacheEntry> best;
  for (const auto& e : entries_)
    if (e.kind == kind && e.weight == weight && e.precision >= precision && (!best || e.precision > best->precision))
      best = e;
  return best;
}

std::string CacheManifest::load(const CacheEntry& entry) const {
  const std::string content = read_file(root_ / entry.file);
  if (sha256_hex(content) != entry.sha256) throw CacheError("hash mismatch for " + (root_ / entry.file).string());
  return content;
}

CacheEntry CacheManifest::store(const std::string& kind, int weight, std::int64_t precision, const std::string& content) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw CacheError("cannot create cache directory " + root_.string() + ": " + ec.message());
  CacheEntry entry{kind, weight, precision, kind + "_" + std::to_string(weight) + "_" + std::to_string(precision) + ".json",
                   sha256_hex(content)};
  {
    LockFile lock(root_ / (entry.file + ".lock"));
    write_file_atomic(root_ / entry.file, content);
  }
  LockFile lock(root_ / "manifest.json.lock");
  read_manifest();
  std::erase_if(entries_, [&](const CacheEntry& e) { return e.file == entry.file; });
  entries_.push_back(entry);
  write_manifest();
  return entry;
}

fs::path resolve_cache_root(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("MFRES_CACHE"); env && *env) return env;
  return "cache";
}

std::string serialize_eigenforms(std::span<const Eigenform> forms) {
  json doc;
  doc["kind"] = "eigenform";
  doc["forms"] = json::array();
  for (const auto& f : forms) {
    json jf{{"weight", f.weight()}, {"label", f.label()}, {"prec_primes", f.prec_primes()}, {"exact", f.is_exact()}};
    json ap = json::array();
    for (auto p : f.primes())
      ap.push_back(f.is_exact() ? f.exact_prime_coeff(p).get_str() : to_decimal(f.prime_coeff(p)));
    jf["a_p"] = std::move(ap);
    json coords = json::array();
    for (const auto& c : f.basis_coordinates()) coords.push_back(to_decimal(c));
    jf["coords"] = std::move(coords);
    doc["forms"].push_back(std::move(jf));
  }
  return doc.dump() + "\n";
}

std::vector<Eigenform> deserialize_eigenforms(const std::string& text) {
  std::vector<Eigenform> out;
  try {
    const json doc = json::parse(text);
    for (const auto& jf : doc.at("forms")) {
      const auto prec = jf.at("prec_primes").get<std::int64_t>();
      const PrimeTable table(prec);
      std::vector<std::int64_t> primes(table.primes().begin(), table.primes().end());
      const auto& ap = jf.at("a_p");
      if (ap.size() != primes.size()) throw CacheError("eigenform cache: prime count mismatch");
      if (jf.at("exact").get<bool>()) {
        std::vector<mpz_class> a;
        for (const auto& v : ap) a.emplace_back(v.get<std::string>());
        out.emplace_back(jf.at("weight").get<int>(), jf.at("label").get<int>(), prec, std::move(primes), std::move(a));
      } else {
        std::vector<Real128> a, coords;
        for (const auto& v : ap) a.emplace_back(v.get<std::string>());
        for (const auto& v : jf.at("coords")) coords.emplace_back(v.get<std::string>());
        out.emplace_back(jf.at("weight").get<int>(), jf.at("label").get<int>(), prec, std::move(primes), std::move(a),
                         std::move(coords));
      }
    }
  } catch (const json::exception& ex) {
    throw CacheError(std::string("eigenform cache: ") + ex.what());
  }
  return out;
}

std::string serialize_plus_space(const PlusSpace& space) {
  json doc{{"kind", "plusform"}, {"k", space.k}, {"prec", space.prec}, {"cutoff", space.cutoff}, {"pivots", space.pivots}};
  doc["basis"] = json::array();
  for (const auto& s : space.basis) {
    std::ostringstream ss;
    write_series(ss, s);
    doc["basis"].push_back(ss.str());
  }
  return doc.dump() + "\n";
}

PlusSpace deserialize_plus_space(const std::string& text) {
  PlusSpace space;
  try {
    const json doc = json::parse(text);
    space.k = doc.at("k").get<int>();
    space.prec = doc.at("prec").get<std::int64_t>();
    space.cutoff = doc.at("cutoff").get<std::int64_t>();
    space.pivots = doc.at("pivots").get<std::vector<ExactSeries::Exponent>>();
    for (const auto& s : doc.at("basis")) {
      std::istringstream in(s.get<std::string>());
      space.basis.push_back(read_series(in));
    }
  } catch (const json::exception& ex) {
    throw CacheError(std::string("plus-space cache: ") + ex.what());
  }
  return space;
}

namespace {

std::vector<Eigenform> truncate_forms(const std::vector<Eigenform>& forms, std::int64_t prec_primes) {
  std::vector<Eigenform> out;
  for (const auto& f : forms) {
    if (f.prec_primes() == prec_primes) {
      out.push_back(f);
      continue;
    }
    std::vector<std::int64_t> primes;
    for (auto p : f.primes())
      if (p <= prec_primes) primes.push_back(p);
    if (f.is_exact()) {
      std::vector<mpz_class> a;
      for (auto p : primes) a.push_back(f.exact_prime_coeff(p));
      out.emplace_back(f.weight(), f.label(), prec_primes, std::move(primes), std::move(a));
    } else {
      std::vector<Real128> a;
      for (auto p : primes) a.push_back(f.prime_coeff(p));
      const auto c = f.basis_coordinates();
      out.emplace_back(f.weight(), f.label(), prec_primes, std::move(primes), std::move(a),
                       std::vector<Real128>(c.begin(), c.end()));
    }
  }
  return out;
}

}  // namespace

std::vector<Eigenform> cached_eigenforms(CacheManifest& cache, int weight, std::int64_t prec_primes, bool* computed) {
  if (auto e = cache.find("eigenform", weight, prec_primes)) {
    if (computed) *computed = false;
    return truncate_forms(deserialize_eigenforms(cache.load(*e)), prec_primes);
  }
  auto forms = hecke_eigenforms(weight, prec_primes);
  cache.store("eigenform", weight, prec_primes, serialize_eigenforms(forms));
  if (computed) *computed = true;
  return forms;
}

PlusSpace cached_plus_space(CacheManifest& cache, int k, std::int64_t prec, bool* computed) {
  if (auto e = cache.find("plusform", k, prec)) {
    if (computed) *computed = false;
    PlusSpace space = deserialize_plus_space(cache.load(*e));
    if (space.prec > prec) {
      for (auto& s : space.basis) s = s.truncated(prec);
      space.prec = prec;
      space.cutoff = std::min(space.cutoff, prec - 1);
    }
    return space;
  }
  PlusSpace space = plus_space_basis(k, prec);
  cache.store("plusform", k, prec, serialize_plus_space(space));
  if (computed) *computed = true;
  return space;
}

}  // namespace mfres
