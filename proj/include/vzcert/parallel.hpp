#pragma once

namespace vzcert {

// Scan kernels come in two flavors: a serial reference and an OpenMP
// version. Tests assert both produce identical results; the benchmark
// target compares their wall time.
enum class exec { serial, parallel };

// threads <= 0 restores the runtime default.
void set_scan_threads(int threads);
int scan_threads();

}  // namespace vzcert
