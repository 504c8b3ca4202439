#include "emx/csv.hpp"

#include "emx/common.hpp"

namespace emx::csv {

bool Reader::next(std::vector<std::string>& fields) {
  if (!std::getline(in_, buffer_)) return false;
  ++line_;
  if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
  if (line_ == 1 && buffer_.starts_with("\xEF\xBB\xBF")) buffer_.erase(0, 3);
  split(buffer_, fields);
  return true;
}

void split(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (std::string_view f : fields) {
    if (!first) out << ',';
    out << escape(f);
    first = false;
  }
  out << '\n';
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

void expect_header(Reader& reader, std::initializer_list<std::string_view> expected,
                   std::string_view what) {
  expect_header(reader, std::span<const std::string_view>(expected.begin(), expected.size()),
                what);
}

void write_row(std::ostream& out, std::span<const std::string_view> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

void expect_header(Reader& reader, std::span<const std::string_view> expected,
                   std::string_view what) {
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw Error(ErrorCode::schema_mismatch, std::string(what) + ": missing header");
  }
  bool ok = fields.size() == expected.size();
  if (ok) {
    std::size_t i = 0;
    for (std::string_view name : expected) {
      if (trim(fields[i++]) != name) {
        ok = false;
        break;
      }
    }
  }
  if (!ok) {
    std::string want;
    for (std::string_view name : expected) {
      if (!want.empty()) want += ',';
      want += name;
    }
    throw Error(ErrorCode::schema_mismatch,
                std::string(what) + ": header mismatch, expected " + want);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open for reading: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open for writing: " + path.string());
  return out;
}

}  // namespace emx::csv
