#pragma once

#include <map>
#include <string>
#include <vector>

#include "alice/autodiff.hpp"

namespace alice::checkpoint {

// Parameter checkpoint file: JSON with a format marker, optional free-form
// metadata, and named arrays with shapes.
//
//   {
//     "format": "alice-params-v1",
//     "meta": { ... },
//     "tensors": { "enc/W0": { "shape": [4, 64], "values": [ ... ] }, ... }
//   }

inline constexpr const char* kFormat = "alice-params-v1";

void save(const std::string& path, const std::vector<const ad::Parameter*>& params,
          const std::map<std::string, double>& meta = {});

/// Loads by name; every passed parameter must be present in the file with a
/// matching shape. Returns the file's metadata.
std::map<std::string, double> load(const std::string& path,
                                   const std::vector<ad::Parameter*>& params);

}  // namespace alice::checkpoint
