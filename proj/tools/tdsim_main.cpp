#include "tdsim/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return tdsim::run_cli(argc, argv, std::cout, std::cerr);
}
