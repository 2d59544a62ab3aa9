#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "deepoly/runtime.hpp"

int main(int argc, char** argv) {
  deepoly::select_blas_kernels(argc, argv);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
