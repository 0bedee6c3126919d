#pragma once

// Line-delimited JSON with an optional self-describing header line:
//   {"format": "<name>", "schema_version": <int>, "meta": {...}}

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"

namespace contraforge {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

struct FileHeader {
  std::string format;
  int schema_version = 0;
  OrderedJson meta = OrderedJson::object();
};

OrderedJson header_json(const FileHeader& header);

// Returns the header if `line` is one, nullopt for an ordinary record.
std::optional<FileHeader> parse_header(const Json& line);

// Writes one compact JSON value followed by '\n'.
void write_line(std::ostream& out, const OrderedJson& value);

class JsonlReader {
 public:
  explicit JsonlReader(std::istream& in) : in_(in) {}

  // Next non-empty line parsed as JSON, or nullopt at end of stream.
  // Syntax errors raise FormatError with the absolute byte offset.
  std::optional<Json> next();

  std::size_t line_number() const { return line_number_; }

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
  std::size_t line_number_ = 0;
};

}  // namespace contraforge
