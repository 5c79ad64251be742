#pragma once

namespace hfscat {

inline constexpr const char* kVersion = "hfscat-0.1.0";

} // namespace hfscat
