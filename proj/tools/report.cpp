#include "report.hpp"

#include <iomanip>
#include <sstream>

#include "sparsespec/io.hpp"
#include "sparsespec/version.hpp"

namespace sparsespec::cli {

Manifest::Manifest(std::string subcommand)
    : subcommand_(std::move(subcommand)), start_(std::chrono::steady_clock::now()) {}

void Manifest::input(const std::string& role, const std::filesystem::path& path) {
  inputs_[role] = {{"path", path.string()}, {"sha256", io::sha256_hex(io::read_file(path))}};
}

void Manifest::output(const std::string& role, const std::filesystem::path& path) {
  outputs_[role] = {{"path", path.string()}, {"sha256", io::sha256_hex(io::read_file(path))}};
}

Json Manifest::finish(Json result, std::uint64_t seed) const {
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  Json out;
  out["subcommand"] = subcommand_;
  out["result"] = std::move(result);
  out["manifest"] = {{"subcommand", subcommand_},
                     {"params", params_},
                     {"inputs", inputs_},
                     {"outputs", outputs_},
                     {"seed", seed},
                     {"version", std::string(version())},
                     {"duration_s", seconds}};
  return out;
}

Json to_json(const std::vector<Index>& v) {
  Json out = Json::array();
  for (Index i : v) out.push_back(i);
  return out;
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n' << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  io::write_file(path, os.str());
}

}  // namespace sparsespec::cli
