#include <iostream>
#include <string>
#include <vector>

#include "spinflow/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return spinflow::run_cli(args, std::cout, std::cerr);
}
