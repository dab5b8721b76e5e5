#pragma once

// On-disk coefficient cache: content-hashed files listed in manifest.json,
// written under per-entry lock files and validated on every load.

#include "mfres/halfint.hpp"
#include "mfres/modforms.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfres {

std::string sha256_hex(std::string_view data);

struct CacheEntry {
  std::string kind;  // "eigenform" or "plusform"
  int weight = 0;    // 2k for eigenforms, k for plus forms
  std::int64_t precision = 0;
  std::string file;  // relative to the root
  std::string sha256;
};

class CacheManifest {
 public:
  /// Reads <root>/manifest.json when present; the directory is created on first store.
  explicit CacheManifest(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::span<const CacheEntry> entries() const { return entries_; }

  /// The most precise entry of this kind and weight with precision >= `precision`.
  std::optional<CacheEntry> find(const std::string& kind, int weight, std::int64_t precision) const;
  /// File content, rejected with CacheError when its hash does not match.
  std::string load(const CacheEntry& entry) const;
  /// Writes the file under an exclusive lock and records it in the manifest.
  CacheEntry store(const std::string& kind, int weight, std::int64_t precision, const std::string& content);

 private:
  void read_manifest();
  void write_manifest() const;

  std::filesystem::path root_;
  std::vector<CacheEntry> entries_;
};

/// --cache flag, else $MFRES_CACHE, else ./cache.
std::filesystem::path resolve_cache_root(const std::optional<std::string>& flag);

std::string serialize_eigenforms(std::span<const Eigenform> forms);
std::vector<Eigenform> deserialize_eigenforms(const std::string& text);

std::string serialize_plus_space(const PlusSpace& space);
PlusSpace deserialize_plus_space(const std::string& text);

/// Eigenforms of this weight with prime tables to at least prec_primes, from
/// the cache when a valid entry exists, computed and stored otherwise.
std::vector<Eigenform> cached_eigenforms(CacheManifest& cache, int weight, std::int64_t prec_primes,
                                         bool* computed = nullptr);

/// Plus-space basis with precision at least prec (truncated to prec on load).
PlusSpace cached_plus_space(CacheManifest& cache, int k, std::int64_t prec, bool* computed = nullptr);

}  // namespace mfres
