#include "bhs/csv.hpp"

#include "bhs/error.hpp"

namespace bhs::csv {

std::vector<Record> parse(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) {
    text.remove_prefix(3);
  }

  std::vector<Record> records;
  Record current;
  std::string field;
  std::size_t line = 1;
  std::size_t i = 0;
  bool record_open = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) {
      records.push_back(std::move(current));
    }
    current = Record{};
    record_open = false;
  };

  while (i < text.size()) {
    if (!record_open) {
      current.line = line;
      record_open = true;
    }
    char ch = text[i];
    if (ch == '"' && field.empty()) {
      // Quoted field.
      std::size_t start_line = line;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        char q = text[i];
        if (q == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        if (q == '\n') {
          ++line;
        }
        field.push_back(q);
        ++i;
      }
      if (!closed) {
        throw Error(Errc::kMalformedRow,
                    "line " + std::to_string(start_line) + ": unterminated quote");
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\n' &&
          !(text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') &&
          text[i] != '\r') {
        throw Error(Errc::kMalformedRow,
                    "line " + std::to_string(line) + ": text after closing quote");
      }
      continue;
    }
    if (ch == ',') {
      end_field();
      ++i;
    } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      i += 2;
      ++line;
    } else if (ch == '\n' || ch == '\r') {
      end_record();
      ++i;
      ++line;
    } else {
      field.push_back(ch);
      ++i;
    }
  }
  if (record_open) {
    end_record();
  }
  return records;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') {
      out.push_back('"');
    }
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) {
      out.push_back(',');
    }
    out += escape(fields[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace bhs::csv
