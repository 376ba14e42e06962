#pragma once

#include <iosfwd>
#include <string>

#include "lingbayes/chain.hpp"
#include "lingbayes/data.hpp"

namespace lingbayes {

struct CsvOptions {
  // Center and scale columns to unit variance after parsing.
  bool standardize = true;
};

// Rectangular numeric CSV with an optional header row (detected when any
// cell of the first row is non-numeric). Errors name the offending row and
// column, 1-based, counting the header as row 1 when present.
DataMatrix read_data_csv(const std::string& path, const CsvOptions& options = {});
DataMatrix read_data_csv(std::istream& in, const CsvOptions& options = {}, const std::string& source = "<stream>");

void write_data_csv(std::ostream& out, const DataMatrix& data);

// Line-delimited JSON: the header object on line 1, then one object per
// sample. Doubles are written with 17 significant digits, so reading a
// written trace reproduces it bit for bit, and equal traces serialize to
// identical bytes.
void write_trace(std::ostream& out, const Trace& trace);
void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(std::istream& in);
Trace read_trace(const std::string& path);

}  // namespace lingbayes
