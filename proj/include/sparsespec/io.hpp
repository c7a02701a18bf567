#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sparsespec/cube.hpp"
#include "sparsespec/sparse_pca.hpp"

namespace sparsespec::io {

// Cube files (.hsc): one JSON header line
//   {"width":W,"height":H,"bands":G,"dtype":"f32","layout":"band-major","wavelengths":[...]|null}
// followed by W*H*G little-endian float32 samples, band-major.
void save_cube(const std::filesystem::path& path, const HyperspectralCube& cube);
HyperspectralCube load_cube(const std::filesystem::path& path);

/// The exact bytes save_cube would write.
std::string encode_cube(const HyperspectralCube& cube);
HyperspectralCube decode_cube(const std::string& bytes);

// CSV with a one-line header. Matrices use columns c0..c{p-1}.
void save_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path);
void save_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels);
std::vector<int> load_labels_csv(const std::filesystem::path& path);

// Binary PGM (P5, maxval 255). Images are row-major height x width.
void save_pgm(const std::filesystem::path& path, const Eigen::MatrixXi& image);
Eigen::MatrixXi load_pgm(const std::filesystem::path& path);

// Sparse basis files (.sbm): one JSON header line
//   {"algorithm","lambda","p","k","group_sizes","group_weights","converged",
//    "iterations_used","has_mean"}
// followed by little-endian float64 A then B (column-major), then the p
// training column means when has_mean is true. Groups are stored as
// contiguous runs.
void save_basis(const std::filesystem::path& path, const SparseBasis& basis);
SparseBasis load_basis(const std::filesystem::path& path);

/// Whole file as bytes.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace sparsespec::io
