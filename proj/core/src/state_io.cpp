#include "mpoforge/state_io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

namespace mpoforge::io {
namespace {

constexpr const char* kFormat = "mpoforge-state-v1";

template <class S>
void write_dump(const std::string& path, const imps::BasicUniformMPS<S>& mps,
                const char* scalar) {
  if (mps.a.empty()) throw Error("save_state: empty state");
  const int d = mps.d(), bond = mps.bond();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_state: cannot open '" + path + "'");
  out << "{\"format\":\"" << kFormat << "\",\"d\":" << d << ",\"bond\":" << bond
      << ",\"scalar\":\"" << scalar << "\"}\n";
  for (const auto& a : mps.a)
    for (int r = 0; r < bond; ++r)
      for (int c = 0; c < bond; ++c) {
        const S v = a(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(S));
      }
  if (!out) throw Error("save_state: write failed for '" + path + "'");
}

/// Minimal field scanner for the flat one-line header; a full JSON parser
/// would accept documents this format never produces.
std::string header_field(const std::string& header, const std::string& key) {
  const std::string probe = "\"" + key + "\":";
  const std::size_t at = header.find(probe);
  if (at == std::string::npos) throw Error("load_state: header lacks '" + key + "'");
  std::size_t b = at + probe.size();
  if (b < header.size() && header[b] == '"') {
    const std::size_t e = header.find('"', b + 1);
    if (e == std::string::npos) throw Error("load_state: unterminated string in header");
    return header.substr(b + 1, e - b - 1);
  }
  std::size_t e = b;
  while (e < header.size() && header[e] != ',' && header[e] != '}') ++e;
  return header.substr(b, e - b);
}

}  // namespace

void save_state(const std::string& path, const imps::UniformMPS& mps) {
  write_dump(path, mps, "real");
}

void save_state(const std::string& path, const imps::CUniformMPS& mps) {
  write_dump(path, mps, "complex");
}

LoadedState load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_state: cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw Error("load_state: missing header line");
  if (header_field(header, "format") != kFormat)
    throw Error("load_state: unrecognized format in '" + path + "'");
  const int d = std::stoi(header_field(header, "d"));
  const int bond = std::stoi(header_field(header, "bond"));
  const std::string scalar = header_field(header, "scalar");
  if (d < 1 || d > 64 || bond < 1 || bond > 4096)
    throw Error("load_state: implausible dimensions in header");

  LoadedState out;
  const std::size_t per_site = static_cast<std::size_t>(bond) * bond;
  if (scalar == "real") {
    out.kind = ScalarKind::Real;
    for (int i = 0; i < d; ++i) {
      Mat a(bond, bond);
      std::vector<double> buf(per_site);
      in.read(reinterpret_cast<char*>(buf.data()), per_site * sizeof(double));
      if (!in) throw Error("load_state: truncated payload");
      for (int r = 0; r < bond; ++r)
        for (int c = 0; c < bond; ++c) a(r, c) = buf[r * bond + c];
      out.real.a.push_back(std::move(a));
    }
  } else if (scalar == "complex") {
    out.kind = ScalarKind::Complex;
    for (int i = 0; i < d; ++i) {
      CMat a(bond, bond);
      std::vector<cplx> buf(per_site);
      in.read(reinterpret_cast<char*>(buf.data()), per_site * sizeof(cplx));
      if (!in) throw Error("load_state: truncated payload");
      for (int r = 0; r < bond; ++r)
        for (int c = 0; c < bond; ++c) a(r, c) = buf[r * bond + c];
      out.cplx.a.push_back(std::move(a));
    }
  } else {
    throw Error("load_state: unknown scalar kind '" + scalar + "'");
  }
  char extra;
  if (in.read(&extra, 1)) throw Error("load_state: trailing bytes after payload");
  return out;
}

}  // namespace mpoforge::io
