#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace situ::cli {

// Bad flags or flag combinations; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sha1("blob <size>\0" + bytes), the hash git assigns to file contents.
std::string git_blob_sha1(const std::filesystem::path& path);

// One manifest per run, written even when the run fails.
class RunManifest {
 public:
  RunManifest(std::string subcommand, std::filesystem::path path);

  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  nlohmann::json summary = nlohmann::json::object();

  void add_input(const std::filesystem::path& p) { inputs_.push_back(p); }
  void add_output(const std::filesystem::path& p) { outputs_.push_back(p); }
  const std::filesystem::path& path() const { return path_; }

  // Hashes every input and output that exists; directories are expanded to
  // their regular files in path order.
  void write(int exit_code, const std::string& error) const;

 private:
  std::string subcommand_;
  std::filesystem::path path_;
  std::string started_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
};

// Runs `body`, maps exceptions to exit codes (2 for usage, config, parse,
// dimension and invalid-input errors, 1 otherwise), writes the manifest and
// returns the exit code.
int run_with_manifest(RunManifest& manifest, const std::function<void()>& body);

}  // namespace situ::cli
