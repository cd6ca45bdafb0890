// csv.hpp
//  Minimal reader for the comma separated files this tool writes (no
//  quoting, first row is the header).
#ifndef PULSECOMM_CSV_HPP
#define PULSECOMM_CSV_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace pulsecomm
{

struct CsvTable
{
    std::filesystem::path path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines; // source line of each row

    // Column index; throws FormatError naming the file if absent
    [[nodiscard]] std::size_t column(const std::string &name) const;
    [[nodiscard]] bool has_column(const std::string &name) const;
    // Parses a cell as a number; empty cells give NaN. Throws ParseError
    // with the file name and line on anything else.
    [[nodiscard]] double number(std::size_t row, std::size_t col) const;
    [[nodiscard]] const std::string &text(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(const std::filesystem::path &path);

} // namespace pulsecomm

#endif
