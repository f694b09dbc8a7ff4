#include "squidemu/csv.hpp"

#include <charconv>
#include <cstdio>

namespace squidemu {

std::string format_float(double v)
{
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::string format_exact(double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void CsvWriter::header(std::initializer_list<std::string_view> columns)
{
    bool first = true;
    for (const auto c : columns) {
        if (!first) out_ << ',';
        out_ << c;
        first = false;
    }
    out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values)
{
    bool first = true;
    for (const double v : values) {
        if (!first) out_ << ',';
        out_ << format_float(v);
        first = false;
    }
    out_ << '\n';
}

void CsvWriter::row(std::string_view label, std::initializer_list<double> values)
{
    out_ << label;
    for (const double v : values) out_ << ',' << format_float(v);
    out_ << '\n';
}

}  // namespace squidemu
