#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tracelab/common.hpp"

namespace {
// Symmetrization warnings are expected in several tests; keep test output readable.
const bool silenced = (tracelab::set_warnings_enabled(false), true);
}  // namespace
