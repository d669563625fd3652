#include <iostream>

#include "ees/cli.hpp"

int main(int argc, char** argv)
{
    return ees::run_cli(argc, argv, std::cout, std::cerr);
}
