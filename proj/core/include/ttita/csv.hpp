#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ttita::csv {

/// One data record. `raw` keeps each field's exact source bytes (quotes
/// included) so untouched cells can be written back verbatim.
struct Record {
  std::vector<std::string> fields;
  std::vector<std::string> raw;
  std::size_t line = 0;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Record> records;
  /// Terminator of the first line of the source ("\n" or "\r\n").
  std::string line_ending = "\n";

  /// Index of `name` in the header, or npos.
  std::size_t column(std::string_view name) const;
};

/// RFC 4180 parsing: comma separator, double-quote quoting with "" escapes,
/// CRLF or LF terminators, quoted fields may span lines. Blank lines are
/// skipped. Every record must have as many fields as the header. Errors
/// carry the physical line number.
Table parse(std::string_view text);
Table read(const std::filesystem::path& path);

/// Field text with quoting applied only when needed.
std::string quote(std::string_view field);

/// Serializes `table`, emitting `raw` for fields whose value is unchanged.
std::string format(const Table& table);

}  // namespace ttita::csv
