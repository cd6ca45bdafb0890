// csv.cpp
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pulsecomm/csv.hpp"
#include "pulsecomm/errors.hpp"

namespace
{

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
    {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',')
    {
        cells.emplace_back();
    }
    return cells;
}

} // namespace

pulsecomm::CsvTable pulsecomm::read_csv(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open " + path.string());
    }
    CsvTable t;
    t.path = path;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty())
        {
            continue;
        }
        std::vector<std::string> cells = split(line);
        if (t.header.empty())
        {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
        {
            throw ParseError(path.string() + ": expected " + std::to_string(t.header.size())
                            + " columns, found " + std::to_string(cells.size()),
                    line_no);
        }
        t.rows.push_back(std::move(cells));
        t.lines.push_back(line_no);
    }
    if (t.header.empty())
    {
        throw FormatError(path.string() + ": empty file", 0);
    }
    return t;
}

bool pulsecomm::CsvTable::has_column(const std::string &name) const
{
    for (const std::string &h : header)
    {
        if (h == name)
        {
            return true;
        }
    }
    return false;
}

std::size_t pulsecomm::CsvTable::column(const std::string &name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
    {
        if (header[i] == name)
        {
            return i;
        }
    }
    throw FormatError(path.string() + ": missing column '" + name + "'", 0);
}

double pulsecomm::CsvTable::number(const std::size_t row, const std::size_t col) const
{
    const std::string &cell = rows.at(row).at(col);
    if (cell.empty())
    {
        return std::nan("");
    }
    double v = 0.0;
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (r.ec != std::errc{} || r.ptr != cell.data() + cell.size())
    {
        throw ParseError(path.string() + ": column '" + header[col] + "' is not a number: '"
                        + cell + "'",
                lines.at(row));
    }
    return v;
}

const std::string &pulsecomm::CsvTable::text(const std::size_t row, const std::size_t col) const
{
    return rows.at(row).at(col);
}
