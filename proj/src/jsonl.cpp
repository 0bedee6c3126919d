#include "contraforge/jsonl.hpp"

#include "contraforge/error.hpp"

namespace contraforge {

OrderedJson header_json(const FileHeader& header) {
  OrderedJson j;
  j["format"] = header.format;
  j["schema_version"] = header.schema_version;
  j["meta"] = header.meta;
  return j;
}

std::optional<FileHeader> parse_header(const Json& line) {
  if (!line.is_object() || !line.contains("format") || !line.contains("schema_version")) {
    return std::nullopt;
  }
  FileHeader h;
  h.format = line.at("format").get<std::string>();
  h.schema_version = line.at("schema_version").get<int>();
  if (line.contains("meta")) h.meta = OrderedJson::parse(line.at("meta").dump());
  return h;
}

void write_line(std::ostream& out, const OrderedJson& value) {
  out << value.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) << '\n';
}

std::optional<Json> JsonlReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    const std::size_t line_start = offset_;
    offset_ += line.size() + 1;
    ++line_number_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      return Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("line " + std::to_string(line_number_) + ": " + e.what(),
                        line_start + (e.byte > 0 ? e.byte - 1 : 0));
    }
  }
  return std::nullopt;
}

}  // namespace contraforge
