#include "hbary/log.hpp"

#include <iostream>
#include <mutex>

namespace hbary {

namespace {
std::mutex g_mutex;
WarningHandler& handler() {
    static WarningHandler h = [](std::string_view m) { std::cerr << "warning: " << m << '\n'; };
    return h;
}
}  // namespace

WarningHandler set_warning_handler(WarningHandler h) {
    std::lock_guard lock(g_mutex);
    auto prev = std::move(handler());
    handler() = std::move(h);
    return prev;
}

void warn(std::string_view message) {
    std::lock_guard lock(g_mutex);
    if (handler()) handler()(message);
}

}  // namespace hbary
