#include "mlh/mesh_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "mlh/errors.hpp"

namespace mlh {

namespace {

/// Line cursor that skips blank and comment lines.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::optional<std::string_view> next() {
    while (pos_ < text_.size()) {
      std::size_t eol = text_.find('\n', pos_);
      if (eol == std::string_view::npos) eol = text_.size();
      std::string_view line = text_.substr(pos_, eol - pos_);
      pos_ = eol + 1;
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      return line;
    }
    return std::nullopt;
  }

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view tok, const char* what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw MalformedRecord(std::string("bad ") + what + " value '" + std::string(tok) + "'");
  }
  return value;
}

long parse_long(std::string_view tok, const char* what) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw MalformedRecord(std::string("bad ") + what + " value '" + std::string(tok) + "'");
  }
  return value;
}

void push_fan(TriangleMesh& mesh, const std::vector<std::uint32_t>& poly) {
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
  }
}

}  // namespace

TriangleMesh parse_off(std::string_view text) {
  LineReader lines(text);

  auto header = lines.next();
  if (!header) throw MalformedHeader("empty OFF stream");
  if (!header->starts_with("OFF")) {
    throw MalformedHeader("missing OFF magic, got '" + std::string(header->substr(0, 8)) + "'");
  }

  // Counts either follow on the header line (glued or spaced) or sit on the
  // next line of their own.
  std::string_view rest = LineReader::trim(header->substr(3));
  std::vector<std::string_view> counts;
  if (!rest.empty()) {
    counts = split_tokens(rest);
  } else {
    auto count_line = lines.next();
    if (!count_line) throw TruncatedFile("OFF ends before the element counts");
    counts = split_tokens(*count_line);
  }
  if (counts.size() < 2) throw MalformedHeader("OFF count line needs vertex and face counts");

  long nv = 0, nf = 0;
  try {
    nv = parse_long(counts[0], "vertex count");
    nf = parse_long(counts[1], "face count");
  } catch (const MalformedRecord& e) {
    throw MalformedHeader(e.what());
  }
  if (nv < 0 || nf < 0) throw MalformedHeader("negative OFF element count");

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    auto line = lines.next();
    if (!line) throw TruncatedFile("OFF ends inside the vertex list");
    auto toks = split_tokens(*line);
    if (toks.size() < 3) throw TruncatedFile("OFF vertex line has fewer than 3 coordinates");
    try {
      mesh.vertices.push_back({parse_double(toks[0], "vertex"), parse_double(toks[1], "vertex"),
                               parse_double(toks[2], "vertex")});
    } catch (const MalformedRecord& e) {
      throw TruncatedFile(e.what());
    }
  }

  for (long i = 0; i < nf; ++i) {
    auto line = lines.next();
    if (!line) throw TruncatedFile("OFF ends inside the face list");
    auto toks = split_tokens(*line);
    if (toks.empty()) throw TruncatedFile("empty OFF face line");
    long m = 0;
    try {
      m = parse_long(toks[0], "face arity");
    } catch (const MalformedRecord& e) {
      throw TruncatedFile(e.what());
    }
    if (m < 3) throw TruncatedFile("OFF face with fewer than 3 vertices");
    if (static_cast<long>(toks.size()) < 1 + m) {
      throw TruncatedFile("OFF face line shorter than its declared arity");
    }
    std::vector<std::uint32_t> poly;
    poly.reserve(static_cast<std::size_t>(m));
    for (long v = 0; v < m; ++v) {
      long idx = 0;
      try {
        idx = parse_long(toks[1 + v], "face index");
      } catch (const MalformedRecord& e) {
        throw TruncatedFile(e.what());
      }
      if (idx < 0 || idx >= nv) {
        throw IndexOutOfRange("OFF face index " + std::to_string(idx) + " outside [0, " +
                              std::to_string(nv) + ")");
      }
      poly.push_back(static_cast<std::uint32_t>(idx));
    }
    push_fan(mesh, poly);
  }
  return mesh;
}

TriangleMesh parse_obj(std::string_view text) {
  TriangleMesh mesh;
  LineReader lines(text);
  while (auto line = lines.next()) {
    auto toks = split_tokens(*line);
    if (toks.empty()) continue;
    std::string_view key = toks[0];
    if (key == "v") {
      if (toks.size() < 4) throw MalformedRecord("OBJ vertex needs 3 coordinates");
      mesh.vertices.push_back({parse_double(toks[1], "vertex"), parse_double(toks[2], "vertex"),
                               parse_double(toks[3], "vertex")});
    } else if (key == "f") {
      if (toks.size() < 4) throw MalformedRecord("OBJ face needs at least 3 vertices");
      std::vector<std::uint32_t> poly;
      poly.reserve(toks.size() - 1);
      const long nv = static_cast<long>(mesh.vertices.size());
      for (std::size_t t = 1; t < toks.size(); ++t) {
        std::string_view ref = toks[t];
        // f v, f v/vt, f v//vn, f v/vt/vn -- only the vertex index matters.
        if (auto slash = ref.find('/'); slash != std::string_view::npos) {
          ref = ref.substr(0, slash);
        }
        long idx = parse_long(ref, "face index");
        if (idx == 0) throw MalformedRecord("OBJ face index 0 is not valid");
        long resolved = idx > 0 ? idx - 1 : nv + idx;
        if (resolved < 0 || resolved >= nv) {
          throw IndexOutOfRange("OBJ face index " + std::to_string(idx) +
                                " does not resolve against " + std::to_string(nv) + " vertices");
        }
        poly.push_back(static_cast<std::uint32_t>(resolved));
      }
      push_fan(mesh, poly);
    }
    // vn / vt / usemtl / mtllib / g / o / s: ignored.
  }
  return mesh;
}

std::string write_off(const TriangleMesh& mesh) {
  std::string out = "OFF\n";
  out += std::to_string(mesh.vertices.size()) + " " + std::to_string(mesh.faces.size()) + " 0\n";
  char buf[96];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x, v.y, v.z);
    out += buf;
  }
  for (const auto& f : mesh.faces) {
    std::snprintf(buf, sizeof(buf), "3 %u %u %u\n", f[0], f[1], f[2]);
    out += buf;
  }
  return out;
}

TriangleMesh load_mesh_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  try {
    if (ext == ".obj") return parse_obj(text);
    return parse_off(text);
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_off_file(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << write_off(mesh);
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace mlh
