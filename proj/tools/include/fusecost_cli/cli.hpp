// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace fusecost::cli {

// kind is "accelerators", "workloads" or "experiments". Existing paths are
// returned unchanged; bare names resolve under $FUSECOST_CONFIG_DIR.
std::filesystem::path resolve_config(const std::string& name_or_path, const std::string& kind);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fusecost::cli
