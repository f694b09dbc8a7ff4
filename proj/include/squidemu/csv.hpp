#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace squidemu {

/// %.9g: nine significant digits, the CSV float format.
std::string format_float(double v);

/// Shortest text that parses back to exactly v.
std::string format_exact(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(std::initializer_list<std::string_view> columns);
    void row(std::initializer_list<double> values);
    // Leading text column followed by numbers.
    void row(std::string_view label, std::initializer_list<double> values);

private:
    std::ostream& out_;
};

}  // namespace squidemu
