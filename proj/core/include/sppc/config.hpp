#pragma once

#include <string>

#include "sppc/sim.hpp"

namespace sppc {

/// Parses a run configuration; absent keys keep the values of `defaults`.
SimConfig config_from_json_text(const std::string& text,
                                const SimConfig& defaults = {});

/// Fully resolved configuration, every defaulted parameter included.
std::string config_to_json_text(const SimConfig& cfg, int indent = 2);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sppc
