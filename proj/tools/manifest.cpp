#include "manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <iterator>

#include "situ/error.hpp"

namespace situ::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json hash_entries(const std::vector<fs::path>& paths) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(p, ec)) {
        if (e.is_regular_file() && e.path().filename() != "manifest.json") {
          files.push_back(e.path());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        out.push_back({{"path", f.string()}, {"sha1", git_blob_sha1(f)}});
      }
    } else if (fs::is_regular_file(p, ec)) {
      out.push_back({{"path", p.string()}, {"sha1", git_blob_sha1(p)}});
    } else {
      out.push_back({{"path", p.string()}, {"sha1", nullptr}});
    }
  }
  return out;
}

}  // namespace

std::string git_blob_sha1(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';

  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) &&
                  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  if (!ok) {
    throw std::runtime_error("sha1 failed for " + path.string());
  }
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 0xf];
  }
  return s;
}

RunManifest::RunManifest(std::string subcommand, fs::path path)
    : subcommand_(std::move(subcommand)), path_(std::move(path)), started_(utc_now()) {}

void RunManifest::write(int exit_code, const std::string& error) const {
  nlohmann::json j;
  j["subcommand"] = subcommand_;
  j["config"] = config;
  j["seed"] = seed;
  j["inputs"] = hash_entries(inputs_);
  j["outputs"] = exit_code == 0 ? hash_entries(outputs_) : nlohmann::json::array();
  j["summary"] = summary;
  j["started_at"] = started_;
  j["finished_at"] = utc_now();
  j["status"] = exit_code == 0 ? "ok" : "failed";
  j["exit_code"] = exit_code;
  j["error"] = error.empty() ? nlohmann::json(nullptr) : nlohmann::json(error);

  std::error_code ec;
  if (path_.has_parent_path()) {
    fs::create_directories(path_.parent_path(), ec);
  }
  std::ofstream out(path_, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) {
    std::cerr << "warning: could not write manifest " << path_ << "\n";
  }
}

int run_with_manifest(RunManifest& manifest, const std::function<void()>& body) {
  int code = 0;
  std::string error;
  try {
    body();
  } catch (const UsageError& e) {
    code = 2, error = e.what();
  } catch (const ConfigError& e) {
    code = 2, error = e.what();
  } catch (const DimensionMismatch& e) {
    code = 2, error = e.what();
  } catch (const ParseError& e) {
    code = 2, error = e.what();
  } catch (const InvalidScene& e) {
    code = 2, error = e.what();
  } catch (const InvalidFrame& e) {
    code = 2, error = e.what();
  } catch (const std::invalid_argument& e) {
    code = 2, error = e.what();
  } catch (const fs::filesystem_error& e) {
    code = 2, error = e.what();
  } catch (const std::exception& e) {
    code = 1, error = e.what();
  }
  if (code != 0) {
    std::cerr << "error: " << error << "\n";
  }
  try {
    manifest.write(code, error);
  } catch (const std::exception& e) {
    std::cerr << "warning: manifest not written: " << e.what() << "\n";
  }
  return code;
}

}  // namespace situ::cli
