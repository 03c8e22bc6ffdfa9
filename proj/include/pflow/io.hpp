#ifndef PFLOW_IO_HPP
#define PFLOW_IO_HPP

#include <string>

#include "pflow/quartic.hpp"

namespace pflow {

// Field files: JSON with a lattice header and the values as (re, im) pairs in
// enumeration order. Kernel files: offsets relative to the first argument.
std::string field_to_json(const Field& f);
Field field_from_json(const std::string& text);

std::string kernel_to_json(const QuarticKernel& V);
QuarticKernel kernel_from_json(const std::string& text);

void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

// deterministic float formatting for reports
std::string fmt_double(double x);

// flat key=value configuration text; '#' starts a comment, blank lines are
// ignored, malformed lines raise a ConfigError with the line number
std::map<std::string, std::string> parse_flat_config(const std::string& text);

} // namespace pflow

#endif
