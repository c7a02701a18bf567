#include "sparsespec/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

namespace sparsespec::io {

using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

namespace {

// Splits "<json>\n<payload>".
std::pair<ordered_json, std::string_view> split_header(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw DataError("malformed header: missing newline");
  ordered_json header;
  try {
    header = ordered_json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed header: ") + e.what());
  }
  if (!header.is_object()) throw DataError("malformed header: not a JSON object");
  return {header, std::string_view(bytes).substr(nl + 1)};
}

template <typename T>
T required(const ordered_json& header, const char* key) {
  if (!header.contains(key)) throw DataError(std::string("malformed header: missing '") + key + "'");
  try {
    return header.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(std::string("malformed header: bad '") + key + "'");
  }
}

void append_doubles(std::string& out, const double* data, Index count) {
  const auto old = out.size();
  out.resize(old + static_cast<std::size_t>(count) * sizeof(double));
  std::memcpy(out.data() + old, data, static_cast<std::size_t>(count) * sizeof(double));
}

}  // namespace

std::string encode_cube(const HyperspectralCube& cube) {
  ordered_json header;
  header["width"] = cube.width();
  header["height"] = cube.height();
  header["bands"] = cube.bands();
  header["dtype"] = "f32";
  header["layout"] = "band-major";
  if (cube.wavelengths()) {
    header["wavelengths"] = *cube.wavelengths();
  } else {
    header["wavelengths"] = nullptr;
  }
  std::string out = header.dump() + "\n";
  const auto samples = cube.samples();
  const auto old = out.size();
  out.resize(old + samples.size() * sizeof(float));
  char* dst = out.data() + old;
  for (double v : samples) {
    const float f = static_cast<float>(v);
    std::memcpy(dst, &f, sizeof(float));
    dst += sizeof(float);
  }
  return out;
}

HyperspectralCube decode_cube(const std::string& bytes) {
  auto [header, payload] = split_header(bytes);
  const auto width = required<Index>(header, "width");
  const auto height = required<Index>(header, "height");
  const auto bands = required<Index>(header, "bands");
  const auto dtype = required<std::string>(header, "dtype");
  if (dtype != "f32") throw DataError("unsupported dtype '" + dtype + "'");
  if (header.contains("layout") && header["layout"] != "band-major") {
    throw DataError("unsupported layout");
  }
  if (width <= 0 || height <= 0 || bands <= 0) throw DataError("malformed header: bad dimensions");
  const std::size_t count = static_cast<std::size_t>(width * height * bands);
  if (payload.size() != count * sizeof(float)) throw DataError("sample count mismatch");
  std::vector<double> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    float f;
    std::memcpy(&f, payload.data() + i * sizeof(float), sizeof(float));
    samples[i] = static_cast<double>(f);
  }
  std::optional<std::vector<double>> wavelengths;
  if (header.contains("wavelengths") && !header["wavelengths"].is_null()) {
    wavelengths = required<std::vector<double>>(header, "wavelengths");
  }
  return HyperspectralCube(width, height, bands, std::move(samples), std::move(wavelengths));
}

void save_cube(const std::filesystem::path& path, const HyperspectralCube& cube) {
  write_file(path, encode_cube(cube));
}

HyperspectralCube load_cube(const std::filesystem::path& path) { return decode_cube(read_file(path)); }

// ---------------------------------------------------------------------------

void save_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ostringstream out;
  for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << 'c' << j;
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  write_file(path, out.str());
}

namespace {

std::vector<std::vector<double>> parse_csv_numbers(const std::string& text, std::size_t& columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV file");
  columns = 1;
  for (char c : line) columns += c == ',';
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw DataError("CSV: bad number '" + field + "'");
      }
    }
    if (row.size() != columns) throw DataError("CSV: ragged row");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
  std::size_t columns = 0;
  const auto rows = parse_csv_numbers(read_file(path), columns);
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(columns));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < columns; ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

void save_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::ostringstream out;
  out << "label\n";
  for (int l : labels) out << l << '\n';
  write_file(path, out.str());
}

std::vector<int> load_labels_csv(const std::filesystem::path& path) {
  std::size_t columns = 0;
  const auto rows = parse_csv_numbers(read_file(path), columns);
  if (columns != 1) throw DataError("label CSV must have a single column");
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (const auto& r : rows) {
    const double v = r[0];
    if (v != static_cast<double>(static_cast<int>(v))) throw DataError("label CSV: non-integer label");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

// ---------------------------------------------------------------------------

void save_pgm(const std::filesystem::path& path, const Eigen::MatrixXi& image) {
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) +
                    "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(image.size()));
  for (Index y = 0; y < image.rows(); ++y)
    for (Index x = 0; x < image.cols(); ++x) {
      const int v = image(y, x);
      if (v < 0 || v > 255) throw DataError("PGM value out of range");
      out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
    }
  write_file(path, out);
}

Eigen::MatrixXi load_pgm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (next_token() != "P5") throw DataError("not a binary PGM (P5) file");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw DataError("malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw DataError("unsupported PGM header");
  ++pos;  // single whitespace after maxval
  if (bytes.size() - pos != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
    throw DataError("PGM pixel count mismatch");
  }
  Eigen::MatrixXi img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img(y, x) = static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(y * w + x)]);
  return img;
}

// ---------------------------------------------------------------------------

void save_basis(const std::filesystem::path& path, const SparseBasis& basis) {
  ordered_json header;
  header["algorithm"] = std::string(to_string(basis.algorithm));
  header["lambda"] = basis.lambda;
  header["p"] = basis.p();
  header["k"] = basis.k();
  header["group_sizes"] = basis.groups.sizes();
  header["group_weights"] = basis.groups.weights();
  header["converged"] = basis.converged;
  header["iterations_used"] = basis.iterations_used;
  const bool has_mean = basis.column_mean.size() == basis.p();
  header["has_mean"] = has_mean;

  // Groups must be contiguous runs to be representable by their sizes.
  Index next = 0;
  for (const auto& g : basis.groups.groups())
    for (Index c : g)
      if (c != next++) throw DataError("save_basis: groups are not contiguous");

  std::string out = header.dump() + "\n";
  const Eigen::MatrixXd A = basis.A;
  const Eigen::MatrixXd B = basis.B;
  append_doubles(out, A.data(), A.size());
  append_doubles(out, B.data(), B.size());
  if (has_mean) append_doubles(out, basis.column_mean.data(), basis.column_mean.size());
  write_file(path, out);
}

SparseBasis load_basis(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  auto [header, payload] = split_header(bytes);
  SparseBasis basis;
  basis.algorithm = parse_algorithm(required<std::string>(header, "algorithm"));
  basis.lambda = required<double>(header, "lambda");
  const auto p = required<Index>(header, "p");
  const auto k = required<Index>(header, "k");
  basis.converged = required<bool>(header, "converged");
  basis.iterations_used = required<int>(header, "iterations_used");
  const bool has_mean = header.value("has_mean", false);
  const auto sizes = required<std::vector<Index>>(header, "group_sizes");
  if (p <= 0 || k <= 0 || k > p) throw DataError("malformed header: bad p/k");
  GroupStructure groups = GroupStructure::contiguous(sizes);
  if (header.contains("group_weights")) {
    groups = GroupStructure(groups.groups(), required<std::vector<double>>(header, "group_weights"));
  }
  groups.validate(p);
  basis.groups = std::move(groups);

  const std::size_t expected =
      static_cast<std::size_t>(2 * p * k + (has_mean ? p : 0)) * sizeof(double);
  if (payload.size() != expected) throw DataError("sample count mismatch");
  basis.A.resize(p, k);
  basis.B.resize(p, k);
  const char* src = payload.data();
  std::memcpy(basis.A.data(), src, static_cast<std::size_t>(p * k) * sizeof(double));
  src += p * k * static_cast<Index>(sizeof(double));
  std::memcpy(basis.B.data(), src, static_cast<std::size_t>(p * k) * sizeof(double));
  src += p * k * static_cast<Index>(sizeof(double));
  if (has_mean) {
    basis.column_mean.resize(p);
    std::memcpy(basis.column_mean.data(), src, static_cast<std::size_t>(p) * sizeof(double));
  }
  return basis;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

}  // namespace sparsespec::io
