#pragma once

#include <filesystem>
#include <iosfwd>

#include "gge/nn/params.hpp"

namespace gge::nn {

// JSONL checkpoint: one record per layer,
//   {"name": ..., "shape": [out, in], "weight": [row-major...], "bias": [...]}
// Records appear in layer-name order, so save(load(save(p))) is byte-identical.
void save_params(const Params& params, std::ostream& out);
void save_params(const Params& params, const std::filesystem::path& path);

// Throws ParseError with the 1-based line of the offending record.
Params load_params(std::istream& in, const std::string& source = "<stream>");
Params load_params(const std::filesystem::path& path);

}  // namespace gge::nn
