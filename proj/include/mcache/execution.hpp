#pragma once

namespace mcache {

/// Selects the OpenMP kernel or the serial reference loop. Both produce
/// bit-identical results; the serial path exists for testing and benchmarks.
enum class Execution { serial, parallel };

}  // namespace mcache
