#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dklab {

/// Locale-independent, round-trippable real formatting (17 significant digits).
std::string format_real(double value);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(std::string_view text);

/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace dklab
