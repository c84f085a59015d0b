#pragma once

#include <istream>
#include <string>
#include <vector>

#include "hrt/prewhiten.hpp"

namespace hrt {

/**
 * @brief Read one numeric column of a comma-separated file.
 *
 * The first non-empty row is a header when the selected field is not a
 * number. @p column is a header name, or a 1-based column index; an empty
 * string selects the first column. Throws IoError when the file cannot be
 * opened, the column does not exist or a value does not parse.
 */
TimeSeries read_series_csv(const std::string& path, const std::string& column = "");
TimeSeries read_series_csv(std::istream& in, const std::string& column = "", const std::string& source = "input");

/// Split one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace hrt
