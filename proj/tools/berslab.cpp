#include "berslab/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return berslab::cli::run(argc, argv, std::cout, std::cerr);
}
