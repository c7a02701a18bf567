#include "sparsespec/version.hpp"

namespace sparsespec {

std::string_view version() { return SPARSESPEC_VERSION; }

}  // namespace sparsespec
