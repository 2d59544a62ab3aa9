#include "deepoly/runtime.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <unistd.h>

extern "C" {
char* openblas_get_corename(void);
char* openblas_get_config(void);
}

namespace deepoly {

std::string blas_core() { return openblas_get_corename(); }

void select_blas_kernels(int argc, char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr || argc < 1) return;
  const std::string core = blas_core();
  const std::string config = openblas_get_config();
  const bool broken = (core == "Cooperlake" || core == "SapphireRapids") && config.find("0.3.20") != std::string::npos;
  if (!broken) return;
  setenv("OPENBLAS_CORETYPE", "SkylakeX", 1);
  execv("/proc/self/exe", argv);
  // exec failed: carry on, the solver results may be wrong
  std::cerr << "warning: could not re-exec with OPENBLAS_CORETYPE=SkylakeX: " << std::strerror(errno) << "\n";
}

}  // namespace deepoly
