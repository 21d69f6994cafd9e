#include "renormlab/io.hpp"

#include <fstream>
#include <sstream>

#include "renormlab/error.hpp"

namespace renormlab::io {

std::string Csv::to_string() const {
  std::ostringstream os;
  auto emit_row = [&os](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << '\n';
  };
  emit_row(header);
  for (const auto& row : rows) emit_row(row);
  return os.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("io.open", path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw error("io.write", path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("io.open", path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_csv(const std::string& path, const Csv& csv) {
  write_file(path, csv.to_string());
}

void write_pgm(const std::string& path, std::size_t width, std::size_t height,
               const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != width * height)
    throw error("io.pgm", "pixel count does not match dimensions");
  std::ostringstream os;
  os << "P5 " << width << " " << height << " 255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()),
           static_cast<std::streamsize>(pixels.size()));
  write_file(path, os.str());
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_file(path, j.dump(2) + "\n");
}

}  // namespace renormlab::io
