#include "qplab_cli/output.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include <openssl/evp.h>

#include "qplab/error.hpp"

namespace qplab::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

namespace {

std::string render(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size())
    throw Error(ErrorKind::InvalidArgument, "CSV row has " + std::to_string(row.size()) + " cells, header has " +
                                                std::to_string(header_.size()));
  std::vector<std::string> out;
  out.reserve(row.size());
  for (const auto& c : row) out.push_back(render(c));
  rows_.push_back(std::move(out));
}

std::string CsvTable::str() const {
  std::string s;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    s += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return s;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << str();
}

std::string config_hash(const std::string& text) {
  const std::string blob = "blob " + std::to_string(text.size()) + std::string(1, '\0') + text;
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md.data(), &len, EVP_sha1(), nullptr) != 1)
    throw Error(ErrorKind::InvalidArgument, "SHA-1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xf];
  }
  return hex;
}

}  // namespace qplab::cli
