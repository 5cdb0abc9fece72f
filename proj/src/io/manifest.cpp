#include "cbtomo/io/manifest.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace cbtomo::io {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 initialisation failed");
  }
  std::array<char, 1 << 16> buffer;
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx, buffer.data(), static_cast<std::size_t>(in.gcount()));
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx, digest, &length);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "cbtomo";
  j["version"] = tool_version;
  j["kind"] = kind;
  j["started_utc"] = started_utc;
  j["wall_seconds"] = wall_seconds;
  j["seed"] = seed;
  j["rng"] = rng;
  j["threads"] = threads;
  j["config"] = config_yaml;
  j["config_canonical"] = config_canonical;
  j["summary"] = summary;
  j["warnings"] = warnings;
  auto files = nlohmann::ordered_json::array();
  for (const auto& f : outputs) {
    files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  j["outputs"] = files;
  return j;
}

void write_manifest(RunManifest& manifest, const std::string& directory,
                    const std::vector<std::string>& names) {
  namespace fs = std::filesystem;
  manifest.outputs.clear();
  for (const auto& name : names) {
    const fs::path p = fs::path(directory) / name;
    manifest.outputs.push_back({name, sha256_file(p.string()), fs::file_size(p)});
  }
  std::ofstream out(fs::path(directory) / "manifest.json", std::ios::binary);
  out << manifest.to_json().dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("cannot write manifest in " + directory);
  }
}

}  // namespace cbtomo::io
