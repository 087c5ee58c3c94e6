#include "commands.hpp"

#include "pxpscar/linalg.hpp"

int main(int argc, char** argv) {
    pxp::ensure_dense_backend(argv);
    return pxp::cli::run_cli(argc, argv);
}
