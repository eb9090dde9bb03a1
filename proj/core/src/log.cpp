#include "podlrom/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace podlrom {
namespace {

std::mutex g_mutex;

WarningHandler& handler_slot() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_mutex);
  return std::exchange(handler_slot(), std::move(handler));
}

void warn(std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (handler_slot()) handler_slot()(message);
}

}  // namespace podlrom
