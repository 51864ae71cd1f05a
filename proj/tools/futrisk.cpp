#include <iostream>

#include "futrisk/cli.hpp"

int main(int argc, char** argv)
{
    return futrisk::cli::run(argc, argv, std::cout, std::cerr);
}
