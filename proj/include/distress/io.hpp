#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace distress::io {

std::string read_text(const std::filesystem::path& path);

// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_text(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// One parsed CSV table; the header row is kept separately.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a named column; throws InvalidArgument when absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
std::string csv_escape(std::string_view field);

}  // namespace distress::io
