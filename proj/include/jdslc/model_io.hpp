#pragma once

#include <string>

#include "json.hpp"

#include "jdslc/model.hpp"

namespace jdslc {

/// A source together with its distortion measures, as stored on disk.
struct SourceFile {
  JointSource source;
  DistortionSpec spec;
};

/// Parses the source/distortion JSON document:
///
///   {
///     "semantic_alphabet": ["0", "1"],
///     "data_alphabet": ["0", "1", "e"],
///     "reconstruction_alphabets": {"semantic": ["0", "1"], "data": ["0", "1", "e"]},
///     "joint_pmf": [[...], [...]],   // row-major, semantic index major
///     "ds_table": [[...], ...],      // |S| x |S_hat|
///     "dx_table": [[...], ...]       // |A| x |A_hat|
///   }
///
/// joint_pmf may also be given flat (length |S|*|A|). Throws InvalidInput on
/// structural problems or source invariant violations.
SourceFile parse_source_json(const nlohmann::json& doc);
SourceFile load_source_file(const std::string& path);

nlohmann::json to_json(const SourceFile& file);

}  // namespace jdslc
