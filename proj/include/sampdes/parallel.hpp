#pragma once

namespace sampdes {

/// Worker cap for the OpenMP kernels. Defaults to the OpenMP maximum,
/// clamped by the SAMPLE_DESIGN_THREADS environment variable when set.
/// Always 1 when built without OpenMP.
int thread_cap();

/// Override the cap for this process (0 restores the default). Values are
/// clamped to [1, hardware maximum].
void set_thread_cap(int n);

}  // namespace sampdes
