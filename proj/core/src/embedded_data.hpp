// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

namespace litepose::detail {

/// Shipped JSON files, keyed by their path under data/ (e.g.
/// "presets/litepose_s.json"). Generated at configure time.
const std::map<std::string, std::string>& embedded_files();

/// Lookup that throws std::invalid_argument with the known keys on miss.
const std::string& embedded_file(const std::string& key);

}  // namespace litepose::detail
