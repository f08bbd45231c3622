#pragma once

#include "asymerr/lnl.hpp"
#include "asymerr/pdf.hpp"

#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace asymerr::cli {

struct MeasurementRecord {
    std::string label;
    std::string kind; // "pdf" or "lnl"
    std::string family;
    double value = 0.0;
    double sigma_plus = 0.0;
    double sigma_minus = 0.0; // always a magnitude
    double coefficient = 1.0;
    std::map<std::string, double> options;
    int line = 0;
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// label kind family value +sigma_plus -sigma_minus [coeff=c] [k=v ...]
MeasurementRecord parse_record_line(const std::string& text, int line = 0);

// format "line" (the above, # comments) or "json" (array of objects)
std::vector<MeasurementRecord> parse_records(std::istream& in, const std::string& format = "line");

ShapeOptions shape_options(const MeasurementRecord& r);
PdfModel to_pdf(const MeasurementRecord& r);
LnLModel to_lnl(const MeasurementRecord& r);

} // namespace asymerr::cli
