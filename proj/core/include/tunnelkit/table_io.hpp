#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tunnelkit {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

// Strict parse of a full field; throws Data on trailing garbage.
double parse_double(std::string_view text);

// Minimal CSV: comma separated, LF line endings. Fields are written verbatim;
// cells that may contain commas (JSON) go through quote_field() first.
class CsvWriter {
public:
    explicit CsvWriter(std::span<const std::string_view> header);

    CsvWriter& field(std::string_view text);
    CsvWriter& field(double value);
    CsvWriter& field(long long value);
    void end_row();

    const std::string& str() const noexcept { return buffer_; }

private:
    std::string buffer_;
    bool row_open_ = false;
};

std::string quote_field(std::string_view text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a named column; throws Format if absent.
    std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

std::string read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tunnelkit
