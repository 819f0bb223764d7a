#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "kdetl/graph.hpp"

namespace kdetl {

// Text format, one statement per line:
//   node <name>
//   arc <parent> <child>
//   edge <a> <b>
// Blank lines and lines starting with '#' are ignored. Node lines come first.

std::string format_dag(const Dag& g);
std::string format_pdag(const Pdag& g);
Dag parse_dag(std::string_view text);
Pdag parse_pdag(std::string_view text);

void write_dag(const Dag& g, const std::filesystem::path& path);
Dag read_dag(const std::filesystem::path& path);

}  // namespace kdetl
