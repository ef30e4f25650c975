#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mlh/mesh.hpp"

namespace mlh {

/// Parses OFF text. Faces with more than three vertices are fan-triangulated
/// around their first vertex. The ModelNet malformation where the counts are
/// glued to the magic ("OFF490 518 0" on one line) is accepted.
///
/// Throws MalformedHeader, TruncatedFile, IndexOutOfRange.
TriangleMesh parse_off(std::string_view text);

/// Parses a minimal OBJ subset: `v` and `f` records. Attribute references
/// (`f 1/1/1 ...`) are stripped to the vertex index; negative indices are
/// resolved against the vertex count seen so far. `vn`/`vt`/material lines
/// are ignored. Same triangulation rule as parse_off.
///
/// Throws MalformedRecord, IndexOutOfRange.
TriangleMesh parse_obj(std::string_view text);

/// OFF text that parse_off round-trips exactly (coordinates are printed with
/// 17 significant digits).
std::string write_off(const TriangleMesh& mesh);

/// Dispatches on the file extension (.off / .obj, case-insensitive).
/// Errors are wrapped in ParseError with the file path prepended.
TriangleMesh load_mesh_file(const std::filesystem::path& path);

void save_off_file(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace mlh
