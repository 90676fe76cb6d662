#pragma once

// Instance files: JSON documents describing a site, functors, natural
// transformations, tabulated theories and Grothendieck transformations.
//
// Groups are {"free_rank": r, "torsion": [d...]} on generators listed free
// part first; every matrix is a list of rows in those generators. Integers
// may be JSON numbers or decimal strings.

#include "bivar/instances.hpp"

#include <filesystem>
#include <string>

namespace bivar {

/// Throws SchemaError located by line:column for syntax errors and by JSON
/// pointer for everything else.
InstanceBundle parse_instance(const std::string& text);
InstanceBundle load_instance(const std::filesystem::path& path);

/// Groups written by their canonical invariants, maps in canonical
/// coordinates. Deterministic; parse_instance(serialize_instance(b)) is
/// equivalent to b.
std::string serialize_instance(const InstanceBundle& b);

}  // namespace bivar
