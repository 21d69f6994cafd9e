#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace renormlab::io {

// CSV with '\n' line endings, '.' decimal point, one header row.
// Cells are preformatted strings; numeric formatting is the caller's
// job (full decimal precision via to_decimal_string).
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
};

void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

void write_csv(const std::string& path, const Csv& csv);

// Binary P5, maxval 255; pixel order row-major from the top row.
void write_pgm(const std::string& path, std::size_t width, std::size_t height,
               const std::vector<std::uint8_t>& pixels);

// UTF-8, keys sorted (nlohmann objects are key-ordered), trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace renormlab::io
