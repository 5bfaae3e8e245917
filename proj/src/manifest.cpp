#include "pqlm/manifest.hpp"

#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace pqlm {

namespace {

std::string digest_hex(EVP_MD_CTX* ctx) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    throw std::runtime_error("sha256: digest finalization failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0xf];
  }
  return out;
}

struct CtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

std::unique_ptr<EVP_MD_CTX, CtxDeleter> make_sha256_ctx() {
  std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: context initialization failed");
  }
  return ctx;
}

}  // namespace

std::string sha256_hex(const void* data, std::size_t n) {
  auto ctx = make_sha256_ctx();
  if (n > 0 && EVP_DigestUpdate(ctx.get(), data, n) != 1) {
    throw std::runtime_error("sha256: update failed");
  }
  return digest_hex(ctx.get());
}

std::string sha256_hex_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sha256: cannot open " + path);
  auto ctx = make_sha256_ctx();
  char chunk[1 << 16];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    if (EVP_DigestUpdate(ctx.get(), chunk, static_cast<std::size_t>(in.gcount())) != 1) {
      throw std::runtime_error("sha256: update failed");
    }
  }
  return digest_hex(ctx.get());
}

nlohmann::ordered_json manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["subcommand"] = m.subcommand;
  j["config"] = m.config;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& [path, hash] : m.inputs) inputs[path] = hash;
  j["inputs"] = inputs;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  for (const auto& [path, hash] : m.outputs) outputs[path] = hash;
  j["outputs"] = outputs;
  j["duration_seconds"] = m.duration_seconds;
  return j;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  out << manifest_to_json(m).dump(2) << "\n";
  if (!out) throw std::runtime_error("write_manifest: write failed for " + path);
}

}  // namespace pqlm
