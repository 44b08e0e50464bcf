#pragma once

namespace csp {

/// Selects between the OpenMP kernel and its serial reference. Both paths
/// produce bit-identical results; the serial one is kept for testing and
/// benchmarking.
enum class Execution { Serial, Parallel };

}  // namespace csp
