#pragma once

#include <string>

namespace deepoly {

/// Name of the kernel set OpenBLAS picked for this CPU.
std::string blas_core();

/// OpenBLAS 0.3.20 picks its Cooperlake kernels on AVX512-BF16 machines and those return
/// wrong dgelsd/dgelss solutions. Re-executes the current process with OPENBLAS_CORETYPE
/// set to SkylakeX when that happens; a no-op otherwise or when the variable is already set.
/// Call first thing in main.
void select_blas_kernels(int argc, char** argv);

}  // namespace deepoly
