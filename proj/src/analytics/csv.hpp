#pragma once

// Small CSV helpers shared by the dataset and survey readers.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace archiprompt::analytics::csv {

std::vector<std::string> split_line(const std::string& line);
std::string quote(std::string_view field);
/// Column name -> position; throws SchemaError naming the first missing column.
std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header,
                                                std::span<const std::string_view> required);
std::optional<double> to_double(std::string_view s);
std::optional<long long> to_int(std::string_view s);

}  // namespace archiprompt::analytics::csv
