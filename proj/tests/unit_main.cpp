#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "pxpscar/linalg.hpp"

int main(int argc, char** argv) {
    pxp::ensure_dense_backend(argv);
    doctest::Context ctx(argc, argv);
    return ctx.run();
}
