#include "homoglab/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace homoglab {

namespace {

static_assert(std::endian::native == std::endian::little, "artifact arrays are written in host order");

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
    std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

void write_f64(const std::filesystem::path& path, std::span<const double> values) {
    auto out = open_out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

std::vector<double> read_f64(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    std::vector<double> out(bytes.size() / sizeof(double));
    std::memcpy(out.data(), bytes.data(), out.size() * sizeof(double));
    return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path, std::ios::binary);
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void dump_matrix(const std::filesystem::path& stem, const Eigen::MatrixXd& a, nlohmann::json header) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = a;
    auto data = stem;
    data += ".f64";
    write_f64(data, std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
    header["dtype"] = "<f8";
    header["order"] = "row-major";
    header["shape"] = {a.rows(), a.cols()};
    header["data"] = data.filename().string();
    auto meta = stem;
    meta += ".json";
    write_json(meta, header);
}

}  // namespace homoglab
