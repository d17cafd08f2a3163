#include <iostream>

#include "hsmax/cli.hpp"

int main(int argc, char** argv) {
    return hsmax::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
