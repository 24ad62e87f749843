#include <pairsim/cli_runner.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return pairsim::cli::run_cli(argc, argv, std::cout, std::cerr);
}
