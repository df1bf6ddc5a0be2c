#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ergodens/errors.hpp"
#include "ergodens/version.hpp"

namespace ergodens::cli {

/// Flat key=value run configuration: one file per run, '#' comments, CLI
/// flags override file entries. Every consumed key is serialized into the
/// provenance header of each output artifact.
class RunConfig {
public:
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": expected key = value");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  void set(const std::string& key, const std::string& value) {
    kv_[key] = value;
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         std::optional<std::string> fallback = {}) const {
    auto it = kv_.find(key);
    if (it != kv_.end()) return it->second;
    if (fallback) return *fallback;
    throw ConfigError("missing config key '" + key + "'");
  }

  double get_double(const std::string& key,
                    std::optional<double> fallback = {}) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing config key '" + key + "'");
    }
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not a number: '" +
                        it->second + "'");
    }
  }

  long get_long(const std::string& key, std::optional<long> fallback = {}) const {
    const double v = get_double(
        key, fallback ? std::optional<double>(*fallback) : std::nullopt);
    return static_cast<long>(v);
  }

  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return std::stoull(it->second);
  }

  std::vector<double> get_doubles(const std::string& key,
                                  std::optional<std::vector<double>> fallback =
                                      {}) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing config key '" + key + "'");
    }
    return parse_doubles(it->second, key);
  }

  static std::vector<double> parse_doubles(const std::string& text,
                                           const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has a bad entry '" + tok +
                          "'");
      }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
    return out;
  }

  std::vector<long> get_longs(const std::string& key) const {
    const auto vs = get_doubles(key);
    std::vector<long> out;
    for (double v : vs) out.push_back(static_cast<long>(v));
    return out;
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

  /// FNV-1a hash of the canonical (sorted) key=value serialization.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&](const std::string& s) {
      for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
      }
    };
    for (const auto& [k, v] : kv_) {
      feed(k);
      feed("=");
      feed(v);
      feed("\n");
    }
    return h;
  }

private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> kv_;
};

/// Provenance header written at the top of every output artifact. Contains
/// the full effective config; reruns with identical configs are
/// byte-identical (no timestamps).
inline void write_provenance(std::ostream& os, const RunConfig& cfg,
                             const std::string& subcommand) {
  os << "# ergodens " << ERGODENS_VERSION_STRING << " " << subcommand << "\n";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(cfg.hash()));
  os << "# config_hash=" << buf << "\n";
  for (const auto& [k, v] : cfg.entries()) os << "# " << k << "=" << v << "\n";
}

}  // namespace ergodens::cli
