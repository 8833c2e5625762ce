#pragma once

#include <string>
#include <string_view>

namespace genet {

/// Throws Error(IO_ERROR) when the file cannot be read.
[[nodiscard]] std::string read_text_file(const std::string& path);

/// Throws Error(IO_ERROR) when the file cannot be written.
void write_text_file(const std::string& path, std::string_view contents);

/// Shortest decimal text that round-trips to the same double.
[[nodiscard]] std::string format_number(double value);

}  // namespace genet
