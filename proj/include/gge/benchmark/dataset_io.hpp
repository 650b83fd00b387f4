#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "gge/benchmark/generator.hpp"

namespace gge::benchmark {

// Line-oriented dataset file.
//
// Line 1 is a header:
//   #gge-dataset v1 split=<name> count=<n> digest=<hex> <generator key=value...>
// followed by one tab-separated record per instance:
//   type_id  label  evidence  context  mask
// `label` is space-separated index:score pairs ("-" when empty); the other
// vector fields are space-separated reals, evidence flattened row-major.
// Reals are written in shortest round-trip form, so load(save(d)) == d.
void save_dataset(const Dataset& data, std::ostream& out);
void save_dataset(const Dataset& data, const std::filesystem::path& path);

// Throws ParseError carrying the 1-based line number of the first bad record.
Dataset load_dataset(std::istream& in, const std::string& source = "<stream>");
Dataset load_dataset(const std::filesystem::path& path);

std::filesystem::path split_path(const std::filesystem::path& dir, Split split);

}  // namespace gge::benchmark
