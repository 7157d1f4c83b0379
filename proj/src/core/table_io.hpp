#ifndef GENREL_TABLE_IO_HPP
#define GENREL_TABLE_IO_HPP

#include <istream>
#include <string>

#include "core/dataset.hpp"

namespace genrel {

// Comma-separated trait table. Header must name x1..xp in order, optionally
// followed by y, z, t_y, t_z. Indicators, when absent, derive from empty
// trait cells; an explicit indicator must be consistent with its cell.
Dataset read_table(const std::string& path);
Dataset read_table_stream(std::istream& in, const std::string& origin);

}  // namespace genrel

#endif
