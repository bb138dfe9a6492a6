#pragma once

#include <functional>
#include <string>

namespace msfem {

// Warnings go to stderr unless a sink is installed.
using WarningSink = std::function<void(const std::string& code, const std::string& message)>;

void set_warning_sink(WarningSink sink);
void warn(const std::string& code, const std::string& message);

}  // namespace msfem
