#include <iostream>
#include <string>
#include <vector>

#include "rulechain/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rulechain::cli::dispatch(args, std::cout, std::cerr);
}
