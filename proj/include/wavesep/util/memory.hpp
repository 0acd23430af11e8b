#pragma once

namespace wavesep::util {

/// Asks the C allocator to keep freed blocks for reuse instead of returning
/// them to the system. Tape-heavy loops allocate and free the same large
/// buffers every step; this removes most of the page-fault cost. No-op where
/// unsupported.
void keep_freed_memory();

}  // namespace wavesep::util
