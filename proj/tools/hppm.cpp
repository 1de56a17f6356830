#include <iostream>

#include "hppm/cli.hpp"

int main(int argc, char** argv)
{
    return hppm::run_cli(argc, argv, std::cout, std::cerr);
}
