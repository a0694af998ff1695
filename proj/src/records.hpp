#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hatepipe::detail {

// One input record: a JSON object, or the reason it could not be parsed.
struct Record {
  std::size_t row = 0;
  nlohmann::json value;
  std::string error;
};

// Reads a JSON-lines file, or a CSV file with a header row when the extension
// is .csv. CSV fields become JSON strings. Blank lines are skipped.
std::vector<Record> read_records(const std::filesystem::path& path);

std::vector<std::vector<std::string>> parse_csv(const std::string& content, std::vector<std::size_t>* start_lines);

// Field accessors accepting the first present key among `keys`.
const nlohmann::json* find_field(const nlohmann::json& obj, std::initializer_list<const char*> keys);
std::optional<std::string> get_string(const nlohmann::json& obj, std::initializer_list<const char*> keys);
// Numbers or numeric strings; throws std::invalid_argument on anything else.
std::optional<double> get_number(const nlohmann::json& obj, std::initializer_list<const char*> keys);
std::optional<bool> get_bool(const nlohmann::json& obj, std::initializer_list<const char*> keys);

}  // namespace hatepipe::detail
