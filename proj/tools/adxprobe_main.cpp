#include "adxprobe/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return adxprobe::run_cli(argc, argv, std::cout, std::cerr);
}
