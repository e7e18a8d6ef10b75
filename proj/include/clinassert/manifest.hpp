#ifndef CLINASSERT_MANIFEST_HPP
#define CLINASSERT_MANIFEST_HPP

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <json.hpp>

#include "clinassert/error.hpp"

#ifndef CLINASSERT_VERSION
#define CLINASSERT_VERSION "0.0.0"
#endif

namespace clinassert {

inline constexpr const char* kToolVersion = CLINASSERT_VERSION;
inline constexpr int kSchemaVersion = 1;

inline std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1)
    throw Error("sha256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Provenance record written next to every output file as "<output>.manifest.json".
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> configs;
  std::vector<std::string> outputs;
  std::string timestamp = utc_timestamp();

  static std::string path_for(const std::string& output) { return output + ".manifest.json"; }

  nlohmann::ordered_json to_json() const {
    auto files = [](const std::vector<std::string>& paths) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& p : paths) arr.push_back({{"path", p}, {"sha256", sha256_file(p)}});
      return arr;
    };
    nlohmann::ordered_json j;
    j["command"] = command;
    j["tool_version"] = kToolVersion;
    j["schema_version"] = kSchemaVersion;
    j["timestamp"] = timestamp;
    j["inputs"] = files(inputs);
    j["configs"] = files(configs);
    j["outputs"] = files(outputs);
    return j;
  }

  /// Writes one manifest per output file.
  void write() const {
    const std::string body = to_json().dump(2) + "\n";
    for (const auto& out : outputs) {
      std::ofstream os(path_for(out), std::ios::binary);
      if (!os) throw Error("cannot write manifest for " + out);
      os << body;
    }
  }
};

/// True when every hash recorded in the manifest matches the file on disk.
inline bool verify_manifest(const std::string& manifest_path) {
  const auto j = nlohmann::json::parse(read_file(manifest_path));
  for (const char* group : {"inputs", "configs", "outputs"}) {
    for (const auto& f : j.at(group)) {
      try {
        if (sha256_file(f.at("path").get<std::string>()) != f.at("sha256").get<std::string>()) return false;
      } catch (const Error&) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace clinassert

#endif  // CLINASSERT_MANIFEST_HPP
