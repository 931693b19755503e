#pragma once

#include <string>

#include "mpoforge/umps.hpp"

namespace mpoforge::io {

/// Uniform MPS state dump: one JSON header line
///   {"format":"mpoforge-state-v1","d":2,"bond":64,"scalar":"real"}
/// terminated by '\n', followed by d * bond * bond raw little-endian doubles
/// per site tensor in row-major order (complex states interleave re,im).
void save_state(const std::string& path, const imps::UniformMPS& mps);
void save_state(const std::string& path, const imps::CUniformMPS& mps);

struct LoadedState {
  ScalarKind kind = ScalarKind::Real;
  imps::UniformMPS real;   ///< valid when kind == Real
  imps::CUniformMPS cplx;  ///< valid when kind == Complex
};

LoadedState load_state(const std::string& path);

}  // namespace mpoforge::io
