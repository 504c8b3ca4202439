#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emx::csv {

// Line-oriented reader for RFC 4180 style CSV. Quoted fields may contain
// commas and doubled quotes but not newlines.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns false at end of input. line() is the 1-based line just read.
  bool next(std::vector<std::string>& fields);
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string buffer_;
  std::size_t line_ = 0;
};

void split(std::string_view line, std::vector<std::string>& fields);

std::string escape(std::string_view field);

void write_row(std::ostream& out, std::initializer_list<std::string_view> fields);
void write_row(std::ostream& out, const std::vector<std::string>& fields);
void write_row(std::ostream& out, std::span<const std::string_view> fields);

// Throws emx::Error(schema_mismatch) unless the header equals `expected`.
void expect_header(Reader& reader, std::initializer_list<std::string_view> expected,
                   std::string_view what);
void expect_header(Reader& reader, std::span<const std::string_view> expected,
                   std::string_view what);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace emx::csv
