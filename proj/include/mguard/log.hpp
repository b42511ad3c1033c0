#pragma once

#include <functional>
#include <string>

namespace mguard {

/// Warnings go to stderr unless a sink is installed (tests capture them).
using WarningSink = std::function<void(const std::string&)>;

/// Installs `sink` and returns the previous one. An empty sink restores stderr.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace mguard
