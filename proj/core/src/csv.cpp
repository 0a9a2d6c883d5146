#include "ttita/csv.hpp"

#include "ttita/error.hpp"
#include "ttita/io.hpp"

namespace ttita::csv {

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::string::npos;
}

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 1;

  bool at_end() const { return pos >= text.size(); }

  bool at_newline() const { return text[pos] == '\n' || (text[pos] == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n'); }

  void skip_newline() {
    if (text[pos] == '\r') ++pos;
    ++pos;
    ++line;
  }

  // Parses one record; returns false when input is exhausted.
  bool next(Record& rec) {
    while (!at_end() && at_newline()) skip_newline();
    if (at_end()) return false;
    rec = Record{};
    rec.line = line;
    while (true) {
      std::string value;
      const std::size_t start = pos;
      if (!at_end() && text[pos] == '"') {
        const std::size_t open_line = line;
        ++pos;
        while (true) {
          if (at_end()) throw CsvError("unterminated quoted field", open_line);
          const char c = text[pos];
          if (c == '"') {
            if (pos + 1 < text.size() && text[pos + 1] == '"') {
              value += '"';
              pos += 2;
              continue;
            }
            ++pos;
            break;
          }
          if (c == '\n') ++line;
          value += c;
          ++pos;
        }
        if (!at_end() && text[pos] != ',' && !at_newline()) {
          throw CsvError("unexpected character after closing quote", line);
        }
      } else {
        while (!at_end() && text[pos] != ',' && !at_newline()) {
          if (text[pos] == '"') throw CsvError("quote inside unquoted field", line);
          value += text[pos++];
        }
      }
      rec.raw.emplace_back(text.substr(start, pos - start));
      rec.fields.push_back(std::move(value));
      if (at_end()) return true;
      if (text[pos] == ',') {
        ++pos;
        continue;
      }
      skip_newline();
      return true;
    }
  }
};

}  // namespace

Table parse(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  Table table;
  const auto nl = text.find('\n');
  if (nl != std::string_view::npos && nl > 0 && text[nl - 1] == '\r') table.line_ending = "\r\n";
  Parser p{text};
  Record header;
  if (!p.next(header)) throw CsvError("missing header row", 1);
  table.header = std::move(header.fields);
  Record rec;
  while (p.next(rec)) {
    if (rec.fields.size() != table.header.size()) {
      throw CsvError("expected " + std::to_string(table.header.size()) + " fields, found " +
                         std::to_string(rec.fields.size()),
                     rec.line);
    }
    table.records.push_back(std::move(rec));
  }
  return table;
}

Table read(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const CsvError& e) {
    throw CsvError(e.detail() + " in " + path.string(), e.line());
  }
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

// Value the raw bytes decode to; used to decide whether raw is still valid.
std::string unquote(std::string_view raw) {
  if (raw.size() < 2 || raw.front() != '"') return std::string(raw);
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    out += raw[i];
    if (raw[i] == '"') ++i;
  }
  return out;
}

}  // namespace

std::string format(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += quote(table.header[i]);
  }
  out += table.line_ending;
  for (const auto& rec : table.records) {
    for (std::size_t i = 0; i < rec.fields.size(); ++i) {
      if (i) out += ',';
      if (i < rec.raw.size() && unquote(rec.raw[i]) == rec.fields[i]) {
        out += rec.raw[i];
      } else {
        out += quote(rec.fields[i]);
      }
    }
    out += table.line_ending;
  }
  return out;
}

}  // namespace ttita::csv
