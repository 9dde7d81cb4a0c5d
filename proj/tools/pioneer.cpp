#include <malloc.h>

#include <iostream>

#include "pioneer/cli.hpp"

int main(int argc, char** argv) {
    // paths run to hundreds of MB; keep freed blocks instead of remapping them per trial
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return pioneer::cli_main(argc, argv, std::cout, std::cerr);
}
