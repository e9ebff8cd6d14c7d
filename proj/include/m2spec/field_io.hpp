#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "m2spec/lattice.hpp"

namespace m2spec {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Parses a full token as a double; false on trailing garbage or empty input.
bool parse_double(std::string_view token, double& out);

/// FieldSample text format: header `m,d,N1..Nd,scalar_kind`, then one row per
/// lattice point in canonical order. Complex values use adjacent re,im columns.
void write_field_csv(std::ostream& out, const FieldSample& field);
FieldSample read_field_csv(std::istream& in);

void save_field_csv(const std::string& path, const FieldSample& field);
FieldSample load_field_csv(const std::string& path);

}  // namespace m2spec
