#pragma once

#include <string_view>

namespace sparsespec {

std::string_view version();

}  // namespace sparsespec
