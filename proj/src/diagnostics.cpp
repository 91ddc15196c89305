#include "impartial/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace impartial {

namespace {
std::mutex g_mutex;
WarningHandler g_handler;
}  // namespace

void warn(std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (g_handler) {
    g_handler(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_mutex);
  std::swap(handler, g_handler);
  return handler;
}

}  // namespace impartial
