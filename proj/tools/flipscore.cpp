#include <iostream>

#include "flipscore/cli.hpp"

int main(int argc, char** argv)
{
    return flipscore::run_cli(argc, argv, std::cout, std::cerr);
}
