#include "records.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hatepipe/error.hpp"
#include "hatepipe/text.hpp"

namespace hatepipe::detail {

using nlohmann::json;

std::vector<std::vector<std::string>> parse_csv(const std::string& content, std::vector<std::size_t>* start_lines) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = row.size() == 1 && row[0].empty();
    if (!blank) {
      rows.push_back(std::move(row));
      if (start_lines) start_lines->push_back(row_line);
    }
    row.clear();
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
      end_row();
      ++line;
      row_line = line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field starting on line " + std::to_string(row_line));
  if (!row.empty() || !field.empty() || field_started) end_row();
  return rows;
}

std::vector<Record> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();

  std::vector<Record> records;
  if (path.extension() == ".csv") {
    std::vector<std::size_t> lines;
    auto rows = parse_csv(content, &lines);
    if (rows.empty()) return records;
    const auto& header = rows.front();
    for (std::size_t r = 1; r < rows.size(); ++r) {
      Record rec;
      rec.row = lines[r];
      if (rows[r].size() != header.size()) {
        rec.error = "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(rows[r].size());
      } else {
        rec.value = json::object();
        for (std::size_t f = 0; f < header.size(); ++f) rec.value[header[f]] = rows[r][f];
      }
      records.push_back(std::move(rec));
    }
    return records;
  }

  std::size_t line_no = 0;
  std::istringstream lines(content);
  std::string line;
  while (std::getline(lines, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Record rec;
    rec.row = line_no;
    try {
      rec.value = json::parse(line);
      if (!rec.value.is_object()) rec.error = "record is not a JSON object";
    } catch (const json::parse_error& e) {
      rec.error = std::string("invalid JSON: ") + e.what();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

const json* find_field(const json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = obj.find(k);
    if (it != obj.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

std::optional<std::string> get_string(const json& obj, std::initializer_list<const char*> keys) {
  const json* v = find_field(obj, keys);
  if (!v) return std::nullopt;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number_integer()) return std::to_string(v->get<long long>());
  if (v->is_number()) return v->dump();
  throw std::invalid_argument("field is not a string");
}

std::optional<double> get_number(const json& obj, std::initializer_list<const char*> keys) {
  const json* v = find_field(obj, keys);
  if (!v) return std::nullopt;
  if (v->is_number()) return v->get<double>();
  if (v->is_string()) {
    const auto s = text::trim(v->get<std::string>());
    if (s.empty()) return std::nullopt;
    double value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc() && ptr == s.data() + s.size()) return value;
  }
  throw std::invalid_argument("field is not a number");
}

std::optional<bool> get_bool(const json& obj, std::initializer_list<const char*> keys) {
  const json* v = find_field(obj, keys);
  if (!v) return std::nullopt;
  if (v->is_boolean()) return v->get<bool>();
  if (v->is_number_integer()) {
    auto n = v->get<long long>();
    if (n == 0 || n == 1) return n == 1;
  }
  if (v->is_string()) {
    const auto s = text::to_lower_ascii(text::trim(v->get<std::string>()));
    if (s.empty()) return std::nullopt;
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
  }
  throw std::invalid_argument("field is not a boolean");
}

}  // namespace hatepipe::detail
