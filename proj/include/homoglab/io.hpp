#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace homoglab {

/// Little-endian 64-bit floats, no header.
void write_f64(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64(const std::filesystem::path& path);

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Writes <stem>.f64 (row-major) and <stem>.json describing it.
void dump_matrix(const std::filesystem::path& stem, const Eigen::MatrixXd& a, nlohmann::json header = {});

}  // namespace homoglab
