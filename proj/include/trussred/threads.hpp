#pragma once

namespace trussred {

/// Caps the width of the parallel scenario and sample loops. n <= 0 restores
/// the OpenMP default.
void set_max_threads(int n);
int max_threads();

}  // namespace trussred
