#pragma once

#include <atomic>
#include <iostream>
#include <string_view>

namespace compasskit {

inline std::atomic<bool>& warnings_enabled() {
  static std::atomic<bool> enabled{true};
  return enabled;
}

inline void log_warn(std::string_view msg) {
  if (warnings_enabled().load()) std::cerr << "warning: " << msg << '\n';
}

}  // namespace compasskit
