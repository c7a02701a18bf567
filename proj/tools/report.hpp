#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsespec/cube.hpp"

namespace sparsespec::cli {

using Json = nlohmann::ordered_json;

/// Thrown for invalid flag combinations detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collects what a subcommand read, wrote and was configured with.
class Manifest {
 public:
  explicit Manifest(std::string subcommand);

  Json& params() { return params_; }
  void input(const std::string& role, const std::filesystem::path& path);
  void output(const std::string& role, const std::filesystem::path& path);

  /// {"subcommand", "result", "manifest"}; the manifest's last field is the
  /// wall-clock duration, the only value that may differ between runs.
  Json finish(Json result, std::uint64_t seed) const;

 private:
  std::string subcommand_;
  Json params_ = Json::object();
  Json inputs_ = Json::object();
  Json outputs_ = Json::object();
  std::chrono::steady_clock::time_point start_;
};

Json to_json(const std::vector<Index>& v);

/// Writes "r,lambda,<value columns...>" rows.
void write_curve_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace sparsespec::cli
