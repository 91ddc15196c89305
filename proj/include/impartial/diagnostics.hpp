#pragma once

#include <functional>
#include <string_view>

namespace impartial {

using WarningHandler = std::function<void(std::string_view)>;

/// Emits a non-fatal diagnostic (rank deficiency, fallbacks). Goes to stderr
/// unless a handler is installed.
void warn(std::string_view message);

/// Installs `handler` and returns the previous one. An empty handler restores stderr.
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace impartial
